#include "hddb/hv.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace hddb {

Hypervector Hypervector::random(uint64_t seed, uint64_t tag, uint32_t dim) {
    Hypervector hv(dim);
    Rng rng(derive_seed(seed, mix64(tag)));
    for (auto& w : hv.words_) w = rng.next();
    hv.mask_tail();
    return hv;
}

Hypervector Hypervector::ones(uint32_t dim) {
    Hypervector hv(dim);
    for (auto& w : hv.words_) w = ~uint64_t{0};
    hv.mask_tail();
    return hv;
}

Hypervector Hypervector::complement() const {
    Hypervector out(dim_);
    for (size_t i = 0; i < words_.size(); ++i) out.words_[i] = ~words_[i];
    out.mask_tail();
    return out;
}

Hypervector Hypervector::slice(uint32_t offset, uint32_t len) const {
    if (uint64_t(offset) + len > dim_)
        throw DimensionError("slice out of range");
    Hypervector out(len);
    extract_bits(words_.data(), offset, len, out.words_.data());
    return out;
}

uint64_t hamming_words(const uint64_t* a, const uint64_t* b, size_t n) {
    uint64_t sum = 0;
    for (size_t i = 0; i < n; ++i) sum += uint64_t(std::popcount(a[i] ^ b[i]));
    return sum;
}

uint64_t hamming_bits(const uint64_t* a, const uint64_t* b, uint64_t bits) {
    size_t full = size_t(bits / 64);
    uint64_t sum = hamming_words(a, b, full);
    uint64_t rem = bits & 63;
    if (rem) sum += uint64_t(std::popcount((a[full] ^ b[full]) & ((uint64_t{1} << rem) - 1)));
    return sum;
}

void extract_bits(const uint64_t* src, uint64_t bit_offset, uint64_t bits, uint64_t* dst) {
    size_t out_words = size_t((bits + 63) / 64);
    size_t w = size_t(bit_offset >> 6);
    uint32_t shift = uint32_t(bit_offset & 63);
    uint64_t last_src_word = (bit_offset + bits - 1) >> 6;
    if (shift == 0) {
        std::memcpy(dst, src + w, out_words * 8);
    } else {
        for (size_t i = 0; i < out_words; ++i) {
            uint64_t lo = src[w + i] >> shift;
            uint64_t hi = (w + i + 1 <= last_src_word) ? (src[w + i + 1] << (64 - shift)) : 0;
            dst[i] = lo | hi;
        }
    }
    uint64_t rem = bits & 63;
    if (rem) dst[out_words - 1] &= (uint64_t{1} << rem) - 1;
}

void deposit_bits(uint64_t* dst, uint64_t bit_offset, const uint64_t* src, uint64_t bits) {
    size_t w = size_t(bit_offset >> 6);
    uint32_t shift = uint32_t(bit_offset & 63);
    size_t src_words = size_t((bits + 63) / 64);
    uint64_t rem = bits & 63;
    uint64_t last_dst_word = (bit_offset + bits - 1) >> 6;
    for (size_t i = 0; i < src_words; ++i) {
        uint64_t word = src[i];
        if (i + 1 == src_words && rem) word &= (uint64_t{1} << rem) - 1;
        dst[w + i] |= word << shift;
        if (shift && w + i + 1 <= last_dst_word) dst[w + i + 1] |= word >> (64 - shift);
    }
}

Hypervector bind(const Hypervector& a, const Hypervector& b) {
    check_same_dim(a, b);
    Hypervector out(a.dim());
    auto aw = a.words();
    auto bw = b.words();
    auto ow = out.words();
    for (size_t i = 0; i < aw.size(); ++i) ow[i] = aw[i] ^ bw[i];
    return out;
}

HammingResult hamming(const Hypervector& a, const Hypervector& b) {
    check_same_dim(a, b);
    uint64_t d = hamming_words(a.words().data(), b.words().data(), a.word_count());
    return {d, double(d) / double(a.dim())};
}

MajorityAccumulator::MajorityAccumulator(uint32_t dim)
    : dim_(dim), words_per_vec_((dim + 63) / 64) {
    if (dim == 0) throw DimensionError("hypervector dimension must be positive");
}

void MajorityAccumulator::add(std::span<const uint64_t> words) {
    if (words.size() < words_per_vec_)
        throw DimensionError("majority accumulator operand too short");
    ++count_;
    size_t need = size_t(std::bit_width(count_));
    while (planes_.size() < need) planes_.emplace_back(words_per_vec_, 0);
    // Bit-sliced ripple-carry add of one bit per lane.
    for (size_t w = 0; w < words_per_vec_; ++w) {
        uint64_t carry = words[w];
        for (size_t p = 0; carry && p < planes_.size(); ++p) {
            uint64_t t = planes_[p][w];
            planes_[p][w] = t ^ carry;
            carry = t & carry;
        }
    }
}

void MajorityAccumulator::finish(std::span<const uint64_t> tie, std::span<uint64_t> out) const {
    if (count_ == 0) throw DimensionError("bundle of an empty list");
    if (out.size() < words_per_vec_ || tie.size() < words_per_vec_)
        throw DimensionError("majority accumulator output too short");
    uint64_t threshold = count_ / 2;  // majority: ones > threshold; tie at == when even
    bool even = (count_ % 2) == 0;
    size_t nplanes = planes_.size();
    for (size_t w = 0; w < words_per_vec_; ++w) {
        uint64_t gt = 0;
        uint64_t eq = ~uint64_t{0};
        for (size_t p = nplanes; p-- > 0;) {
            uint64_t tbit = ((threshold >> p) & 1) ? ~uint64_t{0} : 0;
            uint64_t cbit = planes_[p][w];
            gt |= eq & cbit & ~tbit;
            eq &= ~(cbit ^ tbit);
        }
        out[w] = even ? (gt | (eq & tie[w])) : gt;
    }
    uint32_t rem = dim_ & 63;
    if (rem) out[words_per_vec_ - 1] &= (uint64_t{1} << rem) - 1;
}

void MajorityAccumulator::reset() {
    count_ = 0;
    for (auto& p : planes_) std::fill(p.begin(), p.end(), 0);
}

Hypervector bundle(std::span<const Hypervector> vs, const Hypervector& tie_breaker) {
    if (vs.empty()) throw DimensionError("bundle of an empty list");
    MajorityAccumulator acc(vs.front().dim());
    for (const auto& v : vs) {
        check_same_dim(v, vs.front());
        acc.add(v.words());
    }
    check_same_dim(tie_breaker, vs.front());
    Hypervector out(vs.front().dim());
    acc.finish(tie_breaker.words(), out.words());
    return out;
}

Codebook Codebook::make(uint64_t seed, uint32_t entry_count, uint32_t dim) {
    Codebook cb;
    cb.dim_ = dim;
    cb.seed_ = seed;
    cb.entries_.reserve(entry_count);
    for (uint32_t i = 0; i < entry_count; ++i)
        cb.entries_.push_back(Hypervector::random(seed, i, dim));
    return cb;
}

namespace {

// Two-stage scan: rank all entries on a word-aligned prefix, then finish
// only candidates within an 8-sigma margin of the prefix leader. The margin
// makes dropping the true argmin a ~1e-15 event per decision, far below the
// error rates this pipeline measures.
constexpr size_t kPrefixWords = 32;

uint64_t screening_margin(uint64_t prefix_bits) {
    return uint64_t(std::ceil(8.0 * std::sqrt(double(prefix_bits) * 0.5)));
}

template <typename DistFull, typename DistPrefix>
NearestResult screened_scan(size_t entries, uint64_t total_bits, DistPrefix prefix_dist,
                            DistFull full_dist) {
    size_t full_words = size_t(total_bits / 64);
    if (entries == 0) throw DimensionError("nearest over an empty codebook");
    if (full_words < kPrefixWords * 2 || entries < 8) {
        NearestResult best{0, full_dist(0)};
        for (uint32_t i = 1; i < entries; ++i) {
            uint64_t d = full_dist(i);
            if (d < best.distance) best = {i, d};
        }
        return best;
    }
    std::vector<uint64_t> pd(entries);
    uint64_t best_pd = ~uint64_t{0};
    for (uint32_t i = 0; i < entries; ++i) {
        pd[i] = prefix_dist(i);
        best_pd = std::min(best_pd, pd[i]);
    }
    uint64_t cutoff = best_pd + screening_margin(kPrefixWords * 64);
    NearestResult best{0, ~uint64_t{0}};
    for (uint32_t i = 0; i < entries; ++i) {
        if (pd[i] > cutoff) continue;
        uint64_t d = full_dist(i);
        if (d < best.distance) best = {i, d};
    }
    return best;
}

}  // namespace

NearestResult Codebook::nearest(const Hypervector& query) const {
    if (entries_.empty()) throw DimensionError("nearest over an empty codebook");
    if (query.dim() != dim_) throw DimensionError("query dimension does not match codebook");
    const uint64_t* q = query.words().data();
    return screened_scan(
        entries_.size(), dim_,
        [&](uint32_t i) {
            return hamming_words(q, entries_[i].words().data(), kPrefixWords);
        },
        [&](uint32_t i) {
            return hamming_words(q, entries_[i].words().data(), query.word_count());
        });
}

NearestResult Codebook::nearest_prefix(std::span<const uint64_t> query, uint64_t bits) const {
    if (entries_.empty()) throw DimensionError("nearest over an empty codebook");
    if (bits > dim_) throw DimensionError("prefix longer than codebook entries");
    const uint64_t* q = query.data();
    return screened_scan(
        entries_.size(), bits,
        [&](uint32_t i) {
            return hamming_words(q, entries_[i].words().data(), kPrefixWords);
        },
        [&](uint32_t i) {
            return hamming_bits(q, entries_[i].words().data(), bits);
        });
}

PositionalBasis PositionalBasis::make(uint64_t seed, uint32_t count, uint32_t dim) {
    PositionalBasis basis;
    basis.dim_ = dim;
    basis.positions_.reserve(count);
    for (uint32_t i = 0; i < count; ++i)
        basis.positions_.push_back(Hypervector::random(seed, i, dim));
    return basis;
}

}  // namespace hddb
