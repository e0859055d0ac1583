#pragma once

// Triple-level-cell image model. Hypervector bits map onto 8-level cells,
// three bits per cell, through a reflected Gray code so that a +-1 level
// shift corrupts exactly one logical bit. Noise injection shifts a seeded
// uniform selection of cells by +-1 level, reflecting at the boundaries.

#include <cstdint>
#include <span>
#include <vector>

#include "hddb/common.hpp"
#include "hddb/hv.hpp"

namespace hddb {

inline constexpr int kTlcLevels = 8;

// Reflected Gray code. bits_of_level[l] = l ^ (l >> 1); level_of_bits is its
// inverse. A bit triple (b0,b1,b2) taken from consecutive vector positions
// forms the pattern b0<<2 | b1<<1 | b2 (first bit most significant).
inline constexpr uint8_t kBitsOfLevel[8] = {0, 1, 3, 2, 6, 7, 5, 4};
inline constexpr uint8_t kLevelOfBits[8] = {0, 1, 3, 2, 7, 6, 4, 5};

struct CellArray {
    std::vector<uint8_t> levels;
    uint64_t logical_bits = 0;

    size_t cell_count() const { return levels.size(); }
    bool operator==(const CellArray& o) const = default;
};

struct NoiseSpec {
    double cell_fraction = 0.0;  // p in [0, 1]
    uint64_t seed = 0;
};

// --- word-level kernels (shared with the flat table storage) ----------------

// Packs `logical_bits` bits from `words` into ceil(bits/3) levels. Bits past
// the end of the vector pad as zero.
void pack_words(const uint64_t* words, uint64_t logical_bits, uint8_t* cells_out);

// Inverse of pack_words. `words_out` must hold ceil(bits/64) words; tail
// bits are zeroed. Throws on a level outside [0, 7].
void unpack_cells(const uint8_t* cells, uint64_t logical_bits, uint64_t* words_out);

// Shifts exactly round(p * n) distinct cells by +-1 level in place.
// Boundary levels reflect (0 -> 1, 7 -> 6) so every chosen cell changes
// state. Pure function of (cells, spec).
void inject_noise_span(std::span<uint8_t> cells, const NoiseSpec& spec);

// --- Hypervector-level API ---------------------------------------------------

CellArray pack(const Hypervector& hv);
Hypervector unpack(const CellArray& cells);
CellArray inject_noise(const CellArray& cells, const NoiseSpec& spec);

// --- flash image file --------------------------------------------------------
// Binary layout (little-endian), documented byte-exact in the README:
//   magic "HDBI", u32 version, u64 row_count, u32 column_count,
//   then per column: u32 logical_bits_per_value, u32 cells_per_value,
//   then per column, row-major, one byte per cell.

inline constexpr char kImageMagic[4] = {'H', 'D', 'B', 'I'};
inline constexpr uint32_t kImageVersion = 1;

}  // namespace hddb
