#pragma once

// Dual-boundary approximate matching over TLC level arrays, plus an exact
// Hamming reference backend behind one similarity-search interface.
//
// A search partitions cells into consecutive k-subsets and runs two sensing
// passes: the upper-bound check passes when every reference level in the
// subset lies at or below query + alpha_pos (a wired-AND along the serial
// string), the lower-bound check fires unless every level lies strictly
// below query - alpha_neg. The score sums both checks over subsets.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hddb/common.hpp"
#include "hddb/hv.hpp"
#include "hddb/table.hpp"
#include "hddb/tlc.hpp"

#include "json.hpp"

namespace hddb {

struct DbamConfig {
    uint32_t k = 8;          // cells per subset
    double alpha_pos = 0.5;  // tolerance margins, in level units
    double alpha_neg = 0.5;

    void validate() const {
        if (k < 1) throw DomainError("dbam k must be at least 1");
        if (alpha_pos < 0 || alpha_neg < 0) throw DomainError("dbam alphas must be nonnegative");
    }
    // Integer cutoffs equivalent to the real-valued margins for integral
    // levels: r <= q + alpha_pos  <=>  r - q <= ub_cutoff, and
    // r < q - alpha_neg  <=>  r - q <= lb_cutoff.
    int ub_cutoff() const { return int(std::floor(alpha_pos)); }
    int lb_cutoff() const {
        double neg = -alpha_neg;
        return neg == std::floor(neg) ? int(neg) - 1 : int(std::floor(neg));
    }
};

struct DbamScore {
    uint64_t score = 0;
    uint64_t max_score = 0;  // 2 * subset count
    double normalized() const { return max_score ? double(score) / double(max_score) : 0.0; }
};

int ubc(std::span<const uint8_t> reference, std::span<const uint8_t> query,
        const DbamConfig& cfg);
int lbc(std::span<const uint8_t> reference, std::span<const uint8_t> query,
        const DbamConfig& cfg);

// Full two-pass score; a final partial subset is evaluated at its true
// length rather than padded.
DbamScore dbam_score(std::span<const uint8_t> reference, std::span<const uint8_t> query,
                     const DbamConfig& cfg);
DbamScore dbam_score(const CellArray& reference, const CellArray& query, const DbamConfig& cfg);

enum class Backend { ExactHamming, Dbam };

Backend backend_from_name(const std::string& name);
std::string backend_name(Backend b);

// Sensing-pass accounting. The dbam path issues exactly two passes per
// search; the exact path models a conventional full-level read
// (levels - 1 reference sensings) followed by XOR/popcount in the NSP.
inline constexpr uint64_t kDbamPassesPerSearch = 2;
inline constexpr uint64_t kExactPassesPerSearch = kTlcLevels - 1;

struct SearchCounters {
    uint64_t searches = 0;
    uint64_t sensing_passes = 0;
    double cell_reads = 0;  // cell-read events summed over passes

    void add_search(uint64_t passes, double cells) {
        searches += 1;
        sensing_passes += passes;
        cell_reads += cells * double(passes);
    }
};

struct SearchHit {
    uint64_t candidate;
    double score;  // exact: 1 - normalized Hamming; dbam: normalized score
};

// Ranks candidates by descending similarity, ties by ascending id. The
// exact backend scores bit images, the dbam backend scores cell images.
std::vector<SearchHit> similarity_search(const Hypervector& query,
                                         std::span<const Hypervector> candidates,
                                         Backend backend, const DbamConfig& cfg,
                                         SearchCounters* counters = nullptr);
std::vector<SearchHit> similarity_search(const CellArray& query,
                                         std::span<const CellArray> candidates,
                                         Backend backend, const DbamConfig& cfg,
                                         SearchCounters* counters = nullptr);

// --- calibration -------------------------------------------------------------

struct BackendThreshold {
    double threshold = 0.0;  // similarity scale; a match scores >= threshold
    double margin = 0.0;     // min match score - max non-match score
    double match_min = 0.0, match_mean = 0.0;
    double nonmatch_max = 0.0, nonmatch_mean = 0.0;
    uint64_t match_count = 0, nonmatch_count = 0;

    nlohmann::json to_json() const;
    static BackendThreshold from_json(const nlohmann::json& j);
};

struct ThresholdProfile {
    uint64_t seed = 0;
    std::vector<double> noise_levels;
    std::string plan_hash;
    bool has_exact = false, has_dbam = false;
    BackendThreshold exact, dbam;

    const BackendThreshold& for_backend(Backend b) const;
    bool has(Backend b) const { return b == Backend::ExactHamming ? has_exact : has_dbam; }

    nlohmann::json to_json() const;
    static ThresholdProfile from_json(const nlohmann::json& j);
};

// Samples match / non-match score distributions for string-equality
// predicates over the table's string columns at each requested noise level
// and places the threshold at the midpoint of the gap. Throws
// CalibrationError when the distributions overlap.
ThresholdProfile calibrate_threshold(const EncodedTable& table,
                                     std::span<const double> noise_levels,
                                     const DbamConfig& cfg, uint64_t seed,
                                     uint32_t samples_per_level = 128,
                                     bool want_exact = true, bool want_dbam = true);

}  // namespace hddb
