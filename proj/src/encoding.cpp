#include "hddb/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hddb {

using nlohmann::json;

double NumericEncoderParams::finest_bins() const {
    long double f = 1.0L;
    for (uint32_t i = 0; i < levels; ++i) f *= bins_per_level;
    return double(f);
}

bool NumericEncoderParams::injective_for_integers() const {
    return integral && domain_lo == std::floor(domain_lo) && domain_hi == std::floor(domain_hi) &&
           (domain_hi - domain_lo) <= finest_bins();
}

uint32_t EncodingPlan::row_dim() const {
    uint64_t total = 0;
    for (const auto& c : columns) total += c.dim();
    return uint32_t(total);
}

std::optional<uint32_t> EncodingPlan::column_index(std::string_view name) const {
    for (uint32_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return i;
    return std::nullopt;
}

const ColumnPlan& EncodingPlan::column(std::string_view name) const {
    auto idx = column_index(name);
    if (!idx) throw DomainError("unknown column: " + std::string(name));
    return columns[*idx];
}

namespace {

void validate_string_params(const std::string& col, const StringEncoderParams& p) {
    if (p.dim == 0) throw DimensionError(col + ": string column dimension must be positive");
    if (p.max_len < 1) throw DomainError(col + ": max_len must be at least 1");
}

void validate_numeric_params(const std::string& col, const NumericEncoderParams& p) {
    if (!(p.domain_lo < p.domain_hi))
        throw DomainError(col + ": numeric domain must satisfy lo < hi");
    if (p.bins_per_level < 2) throw DomainError(col + ": bins_per_level must be at least 2");
    if (p.levels < 1) throw DomainError(col + ": levels must be at least 1");
    if (p.dim < 3 * p.levels)
        throw DimensionError(col + ": dimension too small for " + std::to_string(p.levels) +
                             " levels");
    if (p.finest_bins() > 4.6e18)
        throw DomainError(col + ": bins_per_level^levels exceeds the supported range");
}

}  // namespace

void EncodingPlan::validate() const {
    if (columns.empty()) throw DomainError("plan has no columns");
    std::set<std::string> names;
    for (const auto& c : columns) {
        if (!names.insert(c.name).second) throw DomainError("duplicate column name: " + c.name);
        if (c.kind == ColumnKind::String)
            validate_string_params(c.name, c.string_params);
        else
            validate_numeric_params(c.name, c.numeric_params);
    }
}

json EncodingPlan::to_json() const {
    json cols = json::array();
    for (const auto& c : columns) {
        json jc;
        jc["name"] = c.name;
        if (c.kind == ColumnKind::String) {
            jc["kind"] = "string";
            jc["dim"] = c.string_params.dim;
            jc["max_len"] = c.string_params.max_len;
            jc["seed"] = c.string_params.seed;
        } else {
            jc["kind"] = "numeric";
            jc["dim"] = c.numeric_params.dim;
            jc["domain_lo"] = c.numeric_params.domain_lo;
            jc["domain_hi"] = c.numeric_params.domain_hi;
            jc["bins_per_level"] = c.numeric_params.bins_per_level;
            jc["levels"] = c.numeric_params.levels;
            jc["integral"] = c.numeric_params.integral;
            jc["seed"] = c.numeric_params.seed;
        }
        cols.push_back(std::move(jc));
    }
    return json{{"master_seed", master_seed}, {"columns", std::move(cols)}};
}

EncodingPlan EncodingPlan::from_json(const json& j) {
    EncodingPlan plan;
    plan.master_seed = j.at("master_seed").get<uint64_t>();
    uint32_t index = 0;
    for (const auto& jc : j.at("columns")) {
        ColumnPlan c;
        c.name = jc.at("name").get<std::string>();
        std::string kind = jc.at("kind").get<std::string>();
        uint64_t default_seed = derive_seed(plan.master_seed, 1000 + index);
        if (kind == "string") {
            c.kind = ColumnKind::String;
            c.string_params.dim = jc.at("dim").get<uint32_t>();
            c.string_params.max_len = jc.value("max_len", 16u);
            c.string_params.seed = jc.value("seed", default_seed);
        } else if (kind == "numeric") {
            c.kind = ColumnKind::Numeric;
            c.numeric_params.dim = jc.at("dim").get<uint32_t>();
            c.numeric_params.domain_lo = jc.at("domain_lo").get<double>();
            c.numeric_params.domain_hi = jc.at("domain_hi").get<double>();
            c.numeric_params.bins_per_level = jc.value("bins_per_level", 100u);
            c.numeric_params.levels = jc.value("levels", 4u);
            c.numeric_params.integral = jc.value("integral", true);
            c.numeric_params.seed = jc.value("seed", default_seed);
        } else {
            throw DomainError("unknown column kind: " + kind);
        }
        plan.columns.push_back(std::move(c));
        ++index;
    }
    plan.validate();
    return plan;
}

std::string EncodingPlan::hash() const {
    std::string dump = to_json().dump();
    return hex64(fnv1a(dump.data(), dump.size()));
}

EncodingPlan make_plan(const std::vector<ColumnSpec>& schema, uint32_t row_dim,
                       uint64_t master_seed) {
    if (schema.empty()) throw DomainError("plan has no columns");
    EncodingPlan plan;
    plan.master_seed = master_seed;
    uint32_t ncols = uint32_t(schema.size());
    uint32_t base = row_dim / ncols;
    for (uint32_t i = 0; i < ncols; ++i) {
        const auto& spec = schema[i];
        uint32_t dim = (i + 1 == ncols) ? row_dim - base * (ncols - 1) : base;
        ColumnPlan c;
        c.name = spec.name;
        c.kind = spec.kind;
        uint64_t col_seed = derive_seed(master_seed, 1000 + i);
        if (spec.kind == ColumnKind::String) {
            c.string_params = {dim, spec.max_len, col_seed};
        } else {
            c.numeric_params = {spec.domain_lo, spec.domain_hi, spec.bins_per_level,
                                spec.levels,    dim,            spec.integral,
                                col_seed};
        }
        plan.columns.push_back(std::move(c));
    }
    plan.validate();
    return plan;
}

// --- digit arithmetic --------------------------------------------------------

namespace {

using i128 = __int128;

// m^n, valid up to ~4.6e18 per plan validation.
i128 finest_bins_exact(const NumericEncoderParams& p) {
    i128 f = 1;
    for (uint32_t i = 0; i < p.levels; ++i) f *= p.bins_per_level;
    return f;
}

bool exact_integer(double v) {
    return std::floor(v) == v && std::abs(v) < 4.6e18;
}

DigitSequence expand_base_m(i128 t, const NumericEncoderParams& p) {
    DigitSequence d;
    d.digits.assign(p.levels, 0);
    for (uint32_t l = p.levels; l-- > 0;) {
        d.digits[l] = uint32_t(t % p.bins_per_level);
        t /= p.bins_per_level;
    }
    return d;
}

}  // namespace

DigitSequence value_to_digits(double x, const NumericEncoderParams& p) {
    if (!(x >= p.domain_lo && x < p.domain_hi))
        throw DomainError("value " + std::to_string(x) + " outside domain [" +
                          std::to_string(p.domain_lo) + ", " + std::to_string(p.domain_hi) + ")");
    i128 mn = finest_bins_exact(p);
    i128 t;
    if (exact_integer(x) && exact_integer(p.domain_lo) && exact_integer(p.domain_hi)) {
        // Exact path: floor(m^n (x-a) / (b-a)) in integer arithmetic.
        i128 num = i128(int64_t(x - p.domain_lo)) * mn;
        t = num / i128(int64_t(p.domain_hi - p.domain_lo));
    } else {
        long double frac = (long double)(x - p.domain_lo) / (long double)(p.domain_hi - p.domain_lo);
        long double tf = std::floor(frac * (long double)mn);
        t = i128(tf);
        if (t < 0) t = 0;
        if (t >= mn) t = mn - 1;
    }
    return expand_base_m(t, p);
}

double digits_to_value(const DigitSequence& d, const NumericEncoderParams& p) {
    if (d.digits.size() != p.levels) throw DomainError("digit sequence has wrong length");
    i128 t = 0;
    for (uint32_t l = 0; l < p.levels; ++l) {
        if (d.digits[l] >= p.bins_per_level)
            throw DomainError("digit " + std::to_string(d.digits[l]) + " out of range");
        t = t * p.bins_per_level + d.digits[l];
    }
    i128 mn = finest_bins_exact(p);
    if (p.integral && exact_integer(p.domain_lo) && exact_integer(p.domain_hi)) {
        // The unique integer in the finest bin [edge, edge + width), width <= 1
        // under an injective configuration; equals the lower edge whenever the
        // edge itself is an integer.
        i128 width_num = i128(int64_t(p.domain_hi - p.domain_lo)) * t;
        i128 offset = (width_num + mn - 1) / mn;  // ceil
        return p.domain_lo + double(int64_t(offset));
    }
    long double edge =
        (long double)p.domain_lo +
        (long double)(p.domain_hi - p.domain_lo) * ((long double)t / (long double)mn);
    return double(edge);
}

BoundDigits bound_to_digits(double x, const NumericEncoderParams& p) {
    if (x == p.domain_hi) {
        BoundDigits b;
        b.above_domain = true;
        return b;
    }
    return {value_to_digits(x, p), false};
}

// --- encoders ----------------------------------------------------------------

StringEncoder::StringEncoder(const StringEncoderParams& p) : params_(p) {
    validate_string_params("string encoder", p);
    symbols_ = Codebook::make(derive_seed(p.seed, kStreamSymbols), kSymbolCount, p.dim);
    positions_ = PositionalBasis::make(derive_seed(p.seed, kStreamPositions), p.max_len + 1, p.dim);
    tie_breaker_ = Hypervector::random(derive_seed(p.seed, kStreamTieBreak), 0, p.dim);
}

Hypervector StringEncoder::encode(std::string_view value) const {
    if (value.size() > params_.max_len)
        throw DomainError("string of length " + std::to_string(value.size()) +
                          " exceeds max_len " + std::to_string(params_.max_len));
    MajorityAccumulator acc(params_.dim);
    size_t words = (params_.dim + 63) / 64;
    std::vector<uint64_t> bound(words);
    for (size_t i = 0; i <= value.size(); ++i) {
        uint32_t symbol =
            (i == value.size()) ? kTerminatorSymbol : uint32_t(uint8_t(value[i]));
        auto sym = symbols_.entry(symbol).words();
        auto pos = positions_.position(uint32_t(i + 1)).words();
        for (size_t w = 0; w < words; ++w) bound[w] = sym[w] ^ pos[w];
        acc.add(bound);
    }
    Hypervector out(params_.dim);
    acc.finish(tie_breaker_.words(), out.words());
    return out;
}

std::string StringEncoder::decode(const Hypervector& hv) const {
    if (hv.dim() != params_.dim) throw DimensionError("decode: dimension mismatch");
    std::string out;
    size_t words = hv.word_count();
    Hypervector probe(params_.dim);
    for (uint32_t i = 1; i <= params_.max_len + 1; ++i) {
        auto pos = positions_.position(i).words();
        auto src = hv.words();
        auto dst = probe.words();
        for (size_t w = 0; w < words; ++w) dst[w] = src[w] ^ pos[w];
        NearestResult r = symbols_.nearest(probe);
        if (r.id == kTerminatorSymbol) return out;
        out.push_back(char(uint8_t(r.id)));
    }
    throw DecodeError("no terminator recovered within " + std::to_string(params_.max_len + 1) +
                      " positions");
}

NumericEncoder::NumericEncoder(const NumericEncoderParams& p) : params_(p) {
    validate_numeric_params("numeric encoder", p);
    bins_ = Codebook::make(derive_seed(p.seed, kStreamBins), p.bins_per_level,
                           p.last_segment_dim());
}

Hypervector NumericEncoder::encode(double x) const {
    DigitSequence d = value_to_digits(x, params_);
    Hypervector out(params_.dim);
    for (uint32_t l = 0; l < params_.levels; ++l) {
        const auto& bin = bins_.entry(d.digits[l]);
        deposit_bits(out.words().data(), params_.segment_offset(l), bin.words().data(),
                     params_.segment_dim(l));
    }
    return out;
}

DigitSequence NumericEncoder::recall_digits(const Hypervector& hv) const {
    if (hv.dim() != params_.dim) throw DimensionError("decode: dimension mismatch");
    DigitSequence d;
    d.digits.resize(params_.levels);
    std::vector<uint64_t> segment((params_.last_segment_dim() + 63) / 64);
    for (uint32_t l = 0; l < params_.levels; ++l) {
        uint32_t seg_dim = params_.segment_dim(l);
        extract_bits(hv.words().data(), params_.segment_offset(l), seg_dim, segment.data());
        d.digits[l] = bins_.nearest_prefix(segment, seg_dim).id;
    }
    return d;
}

std::pair<DigitSequence, double> NumericEncoder::decode(const Hypervector& hv) const {
    DigitSequence d = recall_digits(hv);
    double v = digits_to_value(d, params_);
    return {std::move(d), v};
}

}  // namespace hddb
