#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace hddb {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Errors. The CLI maps these onto exit codes (see tools/hddb.cpp).
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct DecodeError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct ParseError : Error {
    size_t offset;
    ParseError(const std::string& msg, size_t off)
        : Error(msg + " at offset " + std::to_string(off)), offset(off) {}
};

struct CalibrationError : Error {
    double match_min;
    double nonmatch_max;
    CalibrationError(const std::string& msg, double mmin, double nmax)
        : Error(msg), match_min(mmin), nonmatch_max(nmax) {}
};

// ---------------------------------------------------------------------------
// Deterministic RNG. Everything random in this project flows through this
// generator so outputs are byte-identical across platforms and runs; the
// standard <random> distributions are implementation-defined and unusable
// for that purpose.
// ---------------------------------------------------------------------------

// splitmix64 finalizer.
constexpr uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent sub-seed for a named stream.
constexpr uint64_t derive_seed(uint64_t seed, uint64_t stream) {
    return mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) + stream);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(mix64(seed ^ 0xbb67ae8584caa73bULL)) {}
    Rng(uint64_t seed, uint64_t stream) : Rng(derive_seed(seed, stream)) {}

    uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Unbiased integer in [0, n). Rejection sampling on the top bits.
    uint64_t next_below(uint64_t n) {
        if (n == 0) throw DomainError("next_below: n must be positive");
        uint64_t mask = ~uint64_t{0} >> __builtin_clzll(n | 1);
        uint64_t v;
        do {
            v = next() & mask;
        } while (v >= n);
        return v;
    }

    // Uniform in [0, 1).
    double next_double() { return double(next() >> 11) * 0x1.0p-53; }

    bool next_bool() { return next() & 1; }

    // Uniform in [lo, hi).
    int64_t next_in(int64_t lo, int64_t hi) {
        return lo + int64_t(next_below(uint64_t(hi - lo)));
    }

private:
    uint64_t state_;
};

// ---------------------------------------------------------------------------
// Row-partitioned parallelism. Workers write to disjoint preassigned slots,
// so results do not depend on the thread count. Degree comes from the
// HDDB_THREADS environment variable, defaulting to the hardware concurrency.
// ---------------------------------------------------------------------------

size_t parallelism_degree();

// Runs fn(begin, end) over a partition of [0, n). fn must only touch state
// owned by its range.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn);

// FNV-1a, used for plan fingerprints embedded in machine outputs.
uint64_t fnv1a(const void* data, size_t len);
std::string hex64(uint64_t v);

}  // namespace hddb
