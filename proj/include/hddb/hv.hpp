#pragma once

// Binary hypervector primitives: deterministic generation, XOR bind,
// majority bundle, Hamming similarity, and nearest-neighbor recall over
// codebooks. Bits are packed LSB-first into 64-bit words; bits past the
// dimension are kept zero so whole-word kernels need no masking.

#include <cstdint>
#include <span>
#include <vector>

#include "hddb/common.hpp"

namespace hddb {

class Hypervector {
public:
    Hypervector() = default;
    explicit Hypervector(uint32_t dim)
        : dim_(dim), words_((dim + 63) / 64, 0) {
        if (dim == 0) throw DimensionError("hypervector dimension must be positive");
    }

    // Pseudorandom vector, a pure function of (seed, tag, dim).
    static Hypervector random(uint64_t seed, uint64_t tag, uint32_t dim);
    static Hypervector ones(uint32_t dim);

    uint32_t dim() const { return dim_; }
    size_t word_count() const { return words_.size(); }
    std::span<const uint64_t> words() const { return words_; }
    std::span<uint64_t> words() { return words_; }

    bool bit(uint32_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
    void set_bit(uint32_t i, bool v) {
        uint64_t m = uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= m;
        else
            words_[i >> 6] &= ~m;
    }

    void flip_bit(uint32_t i) { words_[i >> 6] ^= uint64_t{1} << (i & 63); }

    Hypervector complement() const;

    // Copy of bits [offset, offset+len), shifted down to position 0.
    Hypervector slice(uint32_t offset, uint32_t len) const;

    bool operator==(const Hypervector& o) const = default;

    // Zero any bits at positions >= dim in the last word.
    void mask_tail() {
        uint32_t rem = dim_ & 63;
        if (rem) words_.back() &= (uint64_t{1} << rem) - 1;
    }

private:
    uint32_t dim_ = 0;
    std::vector<uint64_t> words_;
};

// --- word-level kernels (shared with the flat table storage) ---------------

uint64_t hamming_words(const uint64_t* a, const uint64_t* b, size_t n);

// Hamming distance over the first `bits` positions of a and b.
uint64_t hamming_bits(const uint64_t* a, const uint64_t* b, uint64_t bits);

// Copy bits [bit_offset, bit_offset+bits) of src into dst starting at
// position 0; trailing dst bits are zeroed.
void extract_bits(const uint64_t* src, uint64_t bit_offset, uint64_t bits, uint64_t* dst);

// OR the first `bits` of src into dst starting at dst bit position
// bit_offset. The destination range must be zero beforehand.
void deposit_bits(uint64_t* dst, uint64_t bit_offset, const uint64_t* src, uint64_t bits);

// --- core operations --------------------------------------------------------

inline void check_same_dim(const Hypervector& a, const Hypervector& b) {
    if (a.dim() != b.dim())
        throw DimensionError("hypervector dimension mismatch: " + std::to_string(a.dim()) +
                             " vs " + std::to_string(b.dim()));
}

// Elementwise XOR. Self-inverse: bind(bind(a,b),a) == b.
Hypervector bind(const Hypervector& a, const Hypervector& b);

struct HammingResult {
    uint64_t distance;
    double normalized;
};

HammingResult hamming(const Hypervector& a, const Hypervector& b);

// Componentwise majority. Exact half ties (even operand count) take the
// tie_breaker's bit.
Hypervector bundle(std::span<const Hypervector> vs, const Hypervector& tie_breaker);

// Incremental majority accumulator with bit-sliced counters; bundle() is a
// thin wrapper. Used by the string encoder to avoid materializing operand
// lists per cell.
class MajorityAccumulator {
public:
    explicit MajorityAccumulator(uint32_t dim);
    void add(std::span<const uint64_t> words);
    size_t count() const { return count_; }
    // Writes the majority vector; `tie` supplies bits for exact-half ties.
    void finish(std::span<const uint64_t> tie, std::span<uint64_t> out) const;
    void reset();

private:
    uint32_t dim_;
    size_t words_per_vec_;
    size_t count_ = 0;
    std::vector<std::vector<uint64_t>> planes_;
};

// --- codebooks --------------------------------------------------------------

struct NearestResult {
    uint32_t id;
    uint64_t distance;
};

// Deterministic dictionary of near-orthogonal vectors. Entry i is
// random(seed, i, dim); regenerating with the same parameters yields
// bit-identical entries, so codebooks are never persisted.
class Codebook {
public:
    Codebook() = default;
    static Codebook make(uint64_t seed, uint32_t entry_count, uint32_t dim);

    uint32_t dim() const { return dim_; }
    uint64_t seed() const { return seed_; }
    size_t size() const { return entries_.size(); }
    const Hypervector& entry(uint32_t id) const { return entries_[id]; }

    // argmin of Hamming distance; ties resolve to the smallest id.
    NearestResult nearest(const Hypervector& query) const;

    // Same, against the first `bits` positions of every entry. `query`
    // must hold at least ceil(bits/64) words with zeroed tail.
    NearestResult nearest_prefix(std::span<const uint64_t> query, uint64_t bits) const;

private:
    uint32_t dim_ = 0;
    uint64_t seed_ = 0;
    std::vector<Hypervector> entries_;
};

inline NearestResult nearest(const Hypervector& query, const Codebook& dict) {
    return dict.nearest(query);
}

// Ordered positional vectors P_1..P_count identifying symbol slots.
class PositionalBasis {
public:
    PositionalBasis() = default;
    static PositionalBasis make(uint64_t seed, uint32_t count, uint32_t dim);

    uint32_t dim() const { return dim_; }
    size_t size() const { return positions_.size(); }
    // 1-based, matching the usual P_i notation.
    const Hypervector& position(uint32_t i) const { return positions_[i - 1]; }

private:
    uint32_t dim_ = 0;
    std::vector<Hypervector> positions_;
};

}  // namespace hddb
