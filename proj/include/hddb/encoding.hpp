#pragma once

// Column encoders. Strings become a majority bundle of symbol-position
// bindings closed by a terminator; numerics become a concatenation of n
// level segments drawn from a shared m-entry bin dictionary, one segment
// per digit of a recursive multi-resolution binning of the value.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hddb/common.hpp"
#include "hddb/hv.hpp"

#include "json.hpp"

namespace hddb {

// Symbols are byte values 0..255 plus one reserved terminator id.
inline constexpr uint32_t kSymbolCount = 257;
inline constexpr uint32_t kTerminatorSymbol = 256;

// Seed streams, hung off a per-column seed.
inline constexpr uint64_t kStreamSymbols = 1;
inline constexpr uint64_t kStreamPositions = 2;
inline constexpr uint64_t kStreamTieBreak = 3;
inline constexpr uint64_t kStreamBins = 4;

struct StringEncoderParams {
    uint32_t dim = 0;      // bits per encoded value
    uint32_t max_len = 0;  // symbols; positional basis holds max_len + 1 entries
    uint64_t seed = 0;

    bool operator==(const StringEncoderParams&) const = default;
};

struct NumericEncoderParams {
    double domain_lo = 0.0;  // a, inclusive
    double domain_hi = 0.0;  // b, exclusive
    uint32_t bins_per_level = 0;  // m
    uint32_t levels = 0;          // n
    uint32_t dim = 0;             // total bits; see segment layout below
    bool integral = false;        // integer column: decode returns the bin's integer
    uint64_t seed = 0;

    // Level layout. Segments are multiples of 3 so every level occupies
    // whole TLC cells; the last level absorbs the remainder.
    uint32_t base_segment_dim() const { return 3 * (dim / (3 * levels)); }
    uint32_t last_segment_dim() const { return dim - base_segment_dim() * (levels - 1); }
    uint32_t segment_dim(uint32_t level) const {
        return level + 1 == levels ? last_segment_dim() : base_segment_dim();
    }
    uint32_t segment_offset(uint32_t level) const { return base_segment_dim() * level; }
    // Count of distinct finest bins, m^n.
    double finest_bins() const;
    // True when every integer in [a, b) maps to its own finest bin, making
    // integer round-trips exact.
    bool injective_for_integers() const;

    bool operator==(const NumericEncoderParams&) const = default;
};

struct DigitSequence {
    std::vector<uint32_t> digits;  // length n, each in [0, m)

    auto operator<=>(const DigitSequence&) const = default;
};

enum class ColumnKind { String, Numeric };

struct ColumnPlan {
    std::string name;
    ColumnKind kind = ColumnKind::String;
    StringEncoderParams string_params;    // valid when kind == String
    NumericEncoderParams numeric_params;  // valid when kind == Numeric

    uint32_t dim() const {
        return kind == ColumnKind::String ? string_params.dim : numeric_params.dim;
    }
    bool operator==(const ColumnPlan&) const = default;
};

struct EncodingPlan {
    uint64_t master_seed = 0;
    std::vector<ColumnPlan> columns;

    uint32_t row_dim() const;
    const ColumnPlan& column(std::string_view name) const;
    std::optional<uint32_t> column_index(std::string_view name) const;
    void validate() const;

    nlohmann::json to_json() const;
    static EncodingPlan from_json(const nlohmann::json& j);
    // FNV-1a over the canonical serialization; embedded in machine outputs.
    std::string hash() const;

    bool operator==(const EncodingPlan&) const = default;
};

// Schema description consumed by the default planner.
struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::String;
    uint32_t max_len = 16;     // string columns
    double domain_lo = 0.0;    // numeric columns
    double domain_hi = 0.0;
    bool integral = true;
    uint32_t bins_per_level = 100;
    uint32_t levels = 4;
};

// Splits row_dim evenly across columns (remainder bits to the last column)
// and derives per-column seeds from the master seed.
EncodingPlan make_plan(const std::vector<ColumnSpec>& schema, uint32_t row_dim,
                       uint64_t master_seed);

// --- digit arithmetic --------------------------------------------------------

// Digit sequence of x under the recursive multi-resolution binning;
// equivalently the base-m expansion of floor(m^n (x-a)/(b-a)).
DigitSequence value_to_digits(double x, const NumericEncoderParams& p);

// Value represented by a digit sequence: the finest bin's lower edge, or for
// integral columns the unique integer inside the bin (these coincide whenever
// bin edges land on integers).
double digits_to_value(const DigitSequence& d, const NumericEncoderParams& p);

// Digits used when comparing against a predicate bound; accepts x == b as a
// one-past-the-end sentinel for right-open ranges.
struct BoundDigits {
    DigitSequence digits;
    bool above_domain = false;  // bound was exactly b
};
BoundDigits bound_to_digits(double x, const NumericEncoderParams& p);

// --- encoders ----------------------------------------------------------------

class StringEncoder {
public:
    explicit StringEncoder(const StringEncoderParams& p);

    const StringEncoderParams& params() const { return params_; }
    const Codebook& symbols() const { return symbols_; }
    const PositionalBasis& positions() const { return positions_; }
    const Hypervector& tie_breaker() const { return tie_breaker_; }

    Hypervector encode(std::string_view value) const;
    // Unbind-then-recall per position until the terminator surfaces. Throws
    // DecodeError when no terminator appears within max_len + 1 positions.
    std::string decode(const Hypervector& hv) const;

private:
    StringEncoderParams params_;
    Codebook symbols_;
    PositionalBasis positions_;
    Hypervector tie_breaker_;
};

class NumericEncoder {
public:
    explicit NumericEncoder(const NumericEncoderParams& p);

    const NumericEncoderParams& params() const { return params_; }
    // Shared bin dictionary: exactly m entries at the widest segment dim;
    // narrower segments use entry prefixes.
    const Codebook& bins() const { return bins_; }

    Hypervector encode(double x) const;
    std::pair<DigitSequence, double> decode(const Hypervector& hv) const;
    // Per-segment associative recall only (no value reconstruction).
    DigitSequence recall_digits(const Hypervector& hv) const;

private:
    NumericEncoderParams params_;
    Codebook bins_;
};

}  // namespace hddb
