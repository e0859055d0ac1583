#include "hddb/dbam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string_view>

namespace hddb {

using nlohmann::json;

namespace {

// Both checks are monotone in max(r_i - q_i) over the subset, which turns
// the inner loop into a running byte maximum the vectorizer handles well.
//   UBC = [dmax <= ub_cutoff]     LBC = [dmax > lb_cutoff]
inline uint32_t subset_score(const uint8_t* r, const uint8_t* q, size_t len, int ub_cut,
                             int lb_cut) {
    int dmax = std::numeric_limits<int>::min();
    for (size_t i = 0; i < len; ++i) dmax = std::max(dmax, int(r[i]) - int(q[i]));
    return uint32_t(dmax <= ub_cut) + uint32_t(dmax > lb_cut);
}

// k == 8 fast path over whole subsets; diffs fit in int8.
uint64_t score_k8(const uint8_t* r, const uint8_t* q, size_t subsets, int ub_cut, int lb_cut) {
    uint64_t score = 0;
    for (size_t s = 0; s < subsets; ++s) {
        const uint8_t* rs = r + 8 * s;
        const uint8_t* qs = q + 8 * s;
        int8_t dmax = -128;
        for (int i = 0; i < 8; ++i)
            dmax = std::max(dmax, int8_t(int(rs[i]) - int(qs[i])));
        score += uint32_t(dmax <= ub_cut) + uint32_t(dmax > lb_cut);
    }
    return score;
}

}  // namespace

int ubc(std::span<const uint8_t> reference, std::span<const uint8_t> query,
        const DbamConfig& cfg) {
    cfg.validate();
    if (reference.size() != query.size()) throw DimensionError("ubc: slice length mismatch");
    if (reference.empty()) throw DimensionError("ubc: empty slice");
    for (size_t i = 0; i < reference.size(); ++i)
        if (!(double(reference[i]) <= double(query[i]) + cfg.alpha_pos)) return 0;
    return 1;
}

int lbc(std::span<const uint8_t> reference, std::span<const uint8_t> query,
        const DbamConfig& cfg) {
    cfg.validate();
    if (reference.size() != query.size()) throw DimensionError("lbc: slice length mismatch");
    if (reference.empty()) throw DimensionError("lbc: empty slice");
    for (size_t i = 0; i < reference.size(); ++i)
        if (!(double(reference[i]) < double(query[i]) - cfg.alpha_neg)) return 1;
    return 0;
}

DbamScore dbam_score(std::span<const uint8_t> reference, std::span<const uint8_t> query,
                     const DbamConfig& cfg) {
    cfg.validate();
    if (reference.size() != query.size())
        throw DimensionError("dbam_score: cell count mismatch");
    size_t n = reference.size();
    DbamScore out;
    out.max_score = 2 * ((n + cfg.k - 1) / cfg.k);
    int ub_cut = cfg.ub_cutoff();
    int lb_cut = cfg.lb_cutoff();
    size_t full = n / cfg.k;
    if (cfg.k == 8) {
        out.score = score_k8(reference.data(), query.data(), full, ub_cut, lb_cut);
    } else {
        for (size_t s = 0; s < full; ++s)
            out.score += subset_score(reference.data() + s * cfg.k, query.data() + s * cfg.k,
                                      cfg.k, ub_cut, lb_cut);
    }
    size_t rem = n - full * cfg.k;
    if (rem)
        out.score += subset_score(reference.data() + full * cfg.k, query.data() + full * cfg.k,
                                  rem, ub_cut, lb_cut);
    return out;
}

DbamScore dbam_score(const CellArray& reference, const CellArray& query, const DbamConfig& cfg) {
    return dbam_score(std::span<const uint8_t>(reference.levels),
                      std::span<const uint8_t>(query.levels), cfg);
}

Backend backend_from_name(const std::string& name) {
    if (name == "exact" || name == "exact-hamming") return Backend::ExactHamming;
    if (name == "dbam") return Backend::Dbam;
    throw DomainError("unknown backend '" + name + "' (expected exact or dbam)");
}

std::string backend_name(Backend b) {
    return b == Backend::ExactHamming ? "exact" : "dbam";
}

std::vector<SearchHit> similarity_search(const Hypervector& query,
                                         std::span<const Hypervector> candidates,
                                         Backend backend, const DbamConfig& cfg,
                                         SearchCounters* counters) {
    (void)cfg;  // margins only apply to the cell-image path
    if (backend != Backend::ExactHamming)
        throw DomainError("dbam backend requires packed cell arrays");
    std::vector<SearchHit> hits;
    hits.reserve(candidates.size());
    for (uint64_t i = 0; i < candidates.size(); ++i) {
        check_same_dim(query, candidates[i]);
        auto h = hamming(query, candidates[i]);
        hits.push_back({i, 1.0 - h.normalized});
    }
    if (counters)
        counters->add_search(kExactPassesPerSearch,
                             double(candidates.size()) * double((query.dim() + 2) / 3));
    std::stable_sort(hits.begin(), hits.end(),
                     [](const SearchHit& a, const SearchHit& b) { return a.score > b.score; });
    return hits;
}

std::vector<SearchHit> similarity_search(const CellArray& query,
                                         std::span<const CellArray> candidates,
                                         Backend backend, const DbamConfig& cfg,
                                         SearchCounters* counters) {
    if (backend != Backend::ExactHamming && backend != Backend::Dbam)
        throw DomainError("unknown backend");
    std::vector<SearchHit> hits;
    hits.reserve(candidates.size());
    if (backend == Backend::Dbam) {
        for (uint64_t i = 0; i < candidates.size(); ++i) {
            if (candidates[i].cell_count() != query.cell_count())
                throw DimensionError("similarity_search: cell count mismatch");
            hits.push_back({i, dbam_score(candidates[i], query, cfg).normalized()});
        }
        if (counters)
            counters->add_search(kDbamPassesPerSearch,
                                 double(candidates.size()) * double(query.cell_count()));
    } else {
        Hypervector q = unpack(query);
        for (uint64_t i = 0; i < candidates.size(); ++i) {
            if (candidates[i].cell_count() != query.cell_count())
                throw DimensionError("similarity_search: cell count mismatch");
            auto h = hamming(q, unpack(candidates[i]));
            hits.push_back({i, 1.0 - h.normalized});
        }
        if (counters)
            counters->add_search(kExactPassesPerSearch,
                                 double(candidates.size()) * double(query.cell_count()));
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const SearchHit& a, const SearchHit& b) { return a.score > b.score; });
    return hits;
}

// --- calibration -------------------------------------------------------------

json BackendThreshold::to_json() const {
    return json{{"threshold", threshold},     {"margin", margin},
                {"match_min", match_min},     {"match_mean", match_mean},
                {"nonmatch_max", nonmatch_max}, {"nonmatch_mean", nonmatch_mean},
                {"match_count", match_count}, {"nonmatch_count", nonmatch_count}};
}

BackendThreshold BackendThreshold::from_json(const json& j) {
    BackendThreshold t;
    t.threshold = j.at("threshold").get<double>();
    t.margin = j.at("margin").get<double>();
    t.match_min = j.at("match_min").get<double>();
    t.match_mean = j.at("match_mean").get<double>();
    t.nonmatch_max = j.at("nonmatch_max").get<double>();
    t.nonmatch_mean = j.at("nonmatch_mean").get<double>();
    t.match_count = j.at("match_count").get<uint64_t>();
    t.nonmatch_count = j.at("nonmatch_count").get<uint64_t>();
    return t;
}

const BackendThreshold& ThresholdProfile::for_backend(Backend b) const {
    if (!has(b))
        throw DomainError("threshold profile has no calibration for backend " +
                          backend_name(b) + "; run calibrate first");
    return b == Backend::ExactHamming ? exact : dbam;
}

json ThresholdProfile::to_json() const {
    json backends = json::object();
    if (has_exact) backends["exact"] = exact.to_json();
    if (has_dbam) backends["dbam"] = dbam.to_json();
    return json{{"version", kVersion},
                {"seed", seed},
                {"plan_hash", plan_hash},
                {"noise_levels", noise_levels},
                {"backends", std::move(backends)}};
}

ThresholdProfile ThresholdProfile::from_json(const json& j) {
    ThresholdProfile p;
    p.seed = j.at("seed").get<uint64_t>();
    p.plan_hash = j.value("plan_hash", "");
    p.noise_levels = j.at("noise_levels").get<std::vector<double>>();
    const auto& backends = j.at("backends");
    if (backends.contains("exact")) {
        p.has_exact = true;
        p.exact = BackendThreshold::from_json(backends.at("exact"));
    }
    if (backends.contains("dbam")) {
        p.has_dbam = true;
        p.dbam = BackendThreshold::from_json(backends.at("dbam"));
    }
    return p;
}

namespace {

struct ScorePool {
    std::vector<double> match, nonmatch;
};

BackendThreshold finalize(const ScorePool& pool, const std::string& backend) {
    BackendThreshold t;
    t.match_count = pool.match.size();
    t.nonmatch_count = pool.nonmatch.size();
    t.match_min = *std::min_element(pool.match.begin(), pool.match.end());
    t.nonmatch_max = *std::max_element(pool.nonmatch.begin(), pool.nonmatch.end());
    t.match_mean = std::accumulate(pool.match.begin(), pool.match.end(), 0.0) /
                   double(pool.match.size());
    t.nonmatch_mean = std::accumulate(pool.nonmatch.begin(), pool.nonmatch.end(), 0.0) /
                      double(pool.nonmatch.size());
    t.margin = t.match_min - t.nonmatch_max;
    t.threshold = 0.5 * (t.match_min + t.nonmatch_max);
    if (t.margin <= 0)
        throw CalibrationError(
            "calibration failed for backend " + backend +
                ": match and non-match score distributions overlap (match_min=" +
                std::to_string(t.match_min) + ", nonmatch_max=" + std::to_string(t.nonmatch_max) +
                ")",
            t.match_min, t.nonmatch_max);
    return t;
}

}  // namespace

ThresholdProfile calibrate_threshold(const EncodedTable& table,
                                     std::span<const double> noise_levels,
                                     const DbamConfig& cfg, uint64_t seed,
                                     uint32_t samples_per_level, bool want_exact,
                                     bool want_dbam) {
    cfg.validate();
    if (table.row_count() < 100)
        throw DomainError("calibration requires at least 100 rows, table has " +
                          std::to_string(table.row_count()));
    if (noise_levels.empty()) throw DomainError("calibration requires at least one noise level");
    std::vector<uint32_t> string_cols;
    for (uint32_t c = 0; c < table.column_count(); ++c)
        if (table.plan().columns[c].kind == ColumnKind::String) string_cols.push_back(c);
    if (string_cols.empty())
        throw DomainError("calibration requires at least one string column");

    ScorePool exact_pool, dbam_pool;
    Rng rng(seed);
    const uint64_t rows = table.row_count();

    // Distinct stored values per string column, found by sampling rows and
    // keying on the clean cell image. Categorical columns surface their
    // whole value set this way, so the non-match ceiling later covers the
    // worst (most similar) value pair rather than a random selection.
    constexpr size_t kMaxDistinct = 48;
    constexpr size_t kMaxPairs = 1536;
    std::vector<std::vector<uint64_t>> reps_per_col(table.column_count());
    for (uint32_t c : string_cols) {
        const EncodedColumn& col = table.column(c);
        std::set<std::string_view> seen;
        auto& reps = reps_per_col[c];
        uint64_t budget = std::min<uint64_t>(rows, 4 * samples_per_level);
        for (uint64_t s = 0; s < budget && reps.size() < kMaxDistinct; ++s) {
            uint64_t r = rng.next_below(rows);
            auto cells = col.row_cells(r);
            std::string_view key(reinterpret_cast<const char*>(cells.data()), cells.size());
            if (seen.insert(key).second) reps.push_back(r);
        }
    }

    struct NoisyRep {
        std::vector<uint8_t> cells;
        std::vector<uint64_t> bits;
    };

    for (double noise : noise_levels) {
        for (uint32_t c : string_cols) {
            const EncodedColumn& col = table.column(c);
            const auto& reps = reps_per_col[c];
            size_t n = reps.size();
            if (n < 2) continue;
            uint32_t draws =
                std::clamp<uint32_t>(samples_per_level / uint32_t(n), 2, 8);

            std::vector<NoisyRep> noisy(n);
            for (size_t i = 0; i < n; ++i) {
                auto ref = col.row_cells(reps[i]);
                noisy[i].cells.assign(ref.begin(), ref.end());
                inject_noise_span(noisy[i].cells, NoiseSpec{noise, rng.next()});
                if (want_exact) {
                    noisy[i].bits.resize(col.words_per_value());
                    unpack_cells(noisy[i].cells.data(), col.dim(), noisy[i].bits.data());
                }
            }

            auto score_pair = [&](const NoisyRep& stored, uint64_t query_row, bool match) {
                auto query_cells = col.row_cells(query_row);
                if (want_dbam) {
                    DbamScore d = dbam_score(stored.cells, query_cells, cfg);
                    (match ? dbam_pool.match : dbam_pool.nonmatch).push_back(d.normalized());
                }
                if (want_exact) {
                    uint64_t dist = hamming_words(stored.bits.data(),
                                                  col.row_bits(query_row).data(),
                                                  col.words_per_value());
                    (match ? exact_pool.match : exact_pool.nonmatch)
                        .push_back(1.0 - double(dist) / double(col.dim()));
                }
            };

            // Match scores: each value against freshly noised copies of its
            // own stored cells.
            for (size_t i = 0; i < n; ++i) {
                score_pair(noisy[i], reps[i], true);
                for (uint32_t d = 1; d < draws; ++d) {
                    NoisyRep extra;
                    auto ref = col.row_cells(reps[i]);
                    extra.cells.assign(ref.begin(), ref.end());
                    inject_noise_span(extra.cells, NoiseSpec{noise, rng.next()});
                    if (want_exact) {
                        extra.bits.resize(col.words_per_value());
                        unpack_cells(extra.cells.data(), col.dim(), extra.bits.data());
                    }
                    score_pair(extra, reps[i], true);
                }
            }

            // Non-match scores: every ordered pair of distinct values when
            // that fits the budget, a seeded random selection otherwise.
            if (n * (n - 1) <= kMaxPairs) {
                for (size_t i = 0; i < n; ++i)
                    for (size_t j = 0; j < n; ++j)
                        if (i != j) score_pair(noisy[i], reps[j], false);
            } else {
                for (size_t p = 0; p < kMaxPairs; ++p) {
                    size_t i = rng.next_below(n);
                    size_t j = rng.next_below(n - 1);
                    if (j >= i) ++j;
                    score_pair(noisy[i], reps[j], false);
                }
            }
        }
    }

    if ((want_exact && exact_pool.match.empty()) || (want_dbam && dbam_pool.match.empty()))
        throw DomainError(
            "calibration found no string column with at least two distinct values");
    if ((want_exact && exact_pool.nonmatch.empty()) || (want_dbam && dbam_pool.nonmatch.empty()))
        throw DomainError("calibration could not sample any non-matching value pair");

    ThresholdProfile profile;
    profile.seed = seed;
    profile.plan_hash = table.plan().hash();
    profile.noise_levels.assign(noise_levels.begin(), noise_levels.end());
    if (want_exact) {
        profile.exact = finalize(exact_pool, "exact");
        profile.has_exact = true;
    }
    if (want_dbam) {
        profile.dbam = finalize(dbam_pool, "dbam");
        profile.has_dbam = true;
    }
    return profile;
}

}  // namespace hddb
