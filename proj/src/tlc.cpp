#include "hddb/tlc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <numeric>

namespace hddb {

namespace {

// 12 stream bits -> 4 levels, and back. Stream bits are LSB-first in memory;
// within a cell the first stream bit is the pattern's most significant bit.
struct PackTables {
    std::array<uint32_t, 4096> levels4;     // 4 levels, 8 bits each
    std::array<uint16_t, 8> stream3;        // level -> 3 stream bits
    PackTables() {
        for (int l = 0; l < 8; ++l) {
            uint8_t p = kBitsOfLevel[l];
            // reverse the 3-bit pattern: stream bit order is LSB-first
            stream3[size_t(l)] = uint16_t(((p >> 2) & 1) | (((p >> 1) & 1) << 1) | ((p & 1) << 2));
        }
        for (uint32_t chunk = 0; chunk < 4096; ++chunk) {
            uint32_t packed = 0;
            for (int c = 0; c < 4; ++c) {
                uint32_t b0 = (chunk >> (3 * c + 0)) & 1;
                uint32_t b1 = (chunk >> (3 * c + 1)) & 1;
                uint32_t b2 = (chunk >> (3 * c + 2)) & 1;
                uint32_t pattern = (b0 << 2) | (b1 << 1) | b2;
                packed |= uint32_t(kLevelOfBits[pattern]) << (8 * c);
            }
            levels4[chunk] = packed;
        }
    }
};

const PackTables& tables() {
    static const PackTables t;
    return t;
}

inline uint64_t stream_bit(const uint64_t* words, uint64_t i, uint64_t nbits) {
    if (i >= nbits) return 0;
    return (words[i >> 6] >> (i & 63)) & 1;
}

}  // namespace

void pack_words(const uint64_t* words, uint64_t logical_bits, uint8_t* cells_out) {
    const auto& t = tables();
    uint64_t cells = (logical_bits + 2) / 3;
    const auto* bytes = reinterpret_cast<const unsigned char*>(words);
    // Chunks processed through the LUT must have all 12 bits inside the
    // vector, and their 4-byte reads must stay inside the word array.
    uint64_t full_chunks = (logical_bits >= 12) ? (logical_bits - 12) / 12 + 1 : 0;
    uint64_t word_bytes = ((logical_bits + 63) / 64) * 8;
    uint64_t read_safe = (word_bytes >= 4) ? (8 * (word_bytes - 4)) / 12 + 1 : 0;
    full_chunks = std::min(full_chunks, read_safe);
    uint64_t g = 0;
    for (; g < full_chunks; ++g) {
        uint64_t bitoff = 12 * g;
        uint32_t raw;
        std::memcpy(&raw, bytes + (bitoff >> 3), 4);
        uint32_t chunk = (raw >> (bitoff & 7)) & 0xfff;
        uint32_t packed = t.levels4[chunk];
        cells_out[4 * g + 0] = uint8_t(packed & 0xff);
        cells_out[4 * g + 1] = uint8_t((packed >> 8) & 0xff);
        cells_out[4 * g + 2] = uint8_t((packed >> 16) & 0xff);
        cells_out[4 * g + 3] = uint8_t((packed >> 24) & 0xff);
    }
    for (uint64_t c = 4 * full_chunks; c < cells; ++c) {
        uint32_t pattern = uint32_t(stream_bit(words, 3 * c, logical_bits) << 2 |
                                    stream_bit(words, 3 * c + 1, logical_bits) << 1 |
                                    stream_bit(words, 3 * c + 2, logical_bits));
        cells_out[c] = kLevelOfBits[pattern];
    }
}

void unpack_cells(const uint8_t* cells, uint64_t logical_bits, uint64_t* words_out) {
    const auto& t = tables();
    uint64_t cells_n = (logical_bits + 2) / 3;
    uint64_t words_n = (logical_bits + 63) / 64;
    std::memset(words_out, 0, words_n * 8);
    for (uint64_t c = 0; c < cells_n; ++c) {
        uint8_t level = cells[c];
        if (level >= kTlcLevels)
            throw DecodeError("corrupt cell image: level " + std::to_string(level) +
                              " outside [0,7]");
        uint64_t bits3 = t.stream3[level];
        uint64_t bitoff = 3 * c;
        words_out[bitoff >> 6] |= bits3 << (bitoff & 63);
        if ((bitoff & 63) > 61 && (bitoff >> 6) + 1 < words_n)
            words_out[(bitoff >> 6) + 1] |= bits3 >> (64 - (bitoff & 63));
    }
    uint64_t rem = logical_bits & 63;
    if (rem) words_out[words_n - 1] &= (uint64_t{1} << rem) - 1;
}

void inject_noise_span(std::span<uint8_t> cells, const NoiseSpec& spec) {
    if (spec.cell_fraction < 0.0 || spec.cell_fraction > 1.0)
        throw DomainError("noise cell_fraction must lie in [0, 1]");
    size_t n = cells.size();
    auto count = size_t(std::llround(spec.cell_fraction * double(n)));
    if (count == 0) return;
    Rng rng(spec.seed);
    // Partial Fisher-Yates: the first `count` slots end up holding a uniform
    // sample of distinct indices.
    static thread_local std::vector<uint32_t> idx;
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (size_t i = 0; i < count; ++i) {
        size_t j = i + size_t(rng.next_below(uint64_t(n - i)));
        std::swap(idx[i], idx[j]);
        uint8_t& level = cells[idx[i]];
        int dir = rng.next_bool() ? 1 : -1;
        if (level == 0)
            level = 1;
        else if (level == kTlcLevels - 1)
            level = kTlcLevels - 2;
        else
            level = uint8_t(int(level) + dir);
    }
}

CellArray pack(const Hypervector& hv) {
    CellArray out;
    out.logical_bits = hv.dim();
    out.levels.resize((hv.dim() + 2) / 3);
    pack_words(hv.words().data(), hv.dim(), out.levels.data());
    return out;
}

Hypervector unpack(const CellArray& cells) {
    if (cells.logical_bits == 0) throw DimensionError("empty cell array");
    if (cells.levels.size() != (cells.logical_bits + 2) / 3)
        throw DimensionError("cell count does not match logical bit count");
    Hypervector hv(uint32_t(cells.logical_bits));
    unpack_cells(cells.levels.data(), cells.logical_bits, hv.words().data());
    return hv;
}

CellArray inject_noise(const CellArray& cells, const NoiseSpec& spec) {
    CellArray out = cells;
    inject_noise_span(out.levels, spec);
    return out;
}

}  // namespace hddb
