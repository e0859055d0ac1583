#pragma once

// Query evaluation over an encoded table. String leaves score the encoded
// literal against every row cell and threshold the similarity; numeric
// leaves recover each row's digit sequence by per-segment associative
// recall and compare it lexicographically against the bound's digits.
// Selected rows decode through unbind-then-recall (strings) or per-segment
// recall (numerics); aggregation runs over the decoded values.
//
// Recall and decode results for a given table are deterministic, so they
// are memoized per column in a TableCaches object that engines may share.
// Instrumentation counters always account the architectural work of the
// dataflow (reads, sensing passes, NSP operations), independent of
// memoization.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hddb/aggregate.hpp"
#include "hddb/common.hpp"
#include "hddb/dbam.hpp"
#include "hddb/encoding.hpp"
#include "hddb/mask.hpp"
#include "hddb/predicate.hpp"
#include "hddb/table.hpp"

namespace hddb {

struct QueryCounters {
    uint64_t rows_scanned = 0;
    uint64_t rows_selected = 0;
    // Encoded-table core.
    uint64_t etc_searches = 0;
    uint64_t etc_sensing_passes = 0;
    double etc_cell_reads = 0;     // cell-read events summed over passes
    uint64_t etc_accum_ops = 0;    // score accumulations
    uint64_t etc_compare_ops = 0;  // bin-index / threshold comparisons
    uint64_t etc_unbind_word_ops = 0;
    // Lookup-dictionary core.
    uint64_t lud_searches = 0;
    uint64_t lud_sensing_passes = 0;
    double lud_cell_reads = 0;
    uint64_t lud_accum_ops = 0;
    uint64_t lud_alu_ops = 0;

    QueryCounters& operator+=(const QueryCounters& o);
};

struct LeafDiagnostics {
    std::string column;
    std::string text;
    double threshold = 0.0;   // string leaves; 0 for numeric recall
    uint64_t matches = 0;
    double score_min = 0.0;   // per-row similarity extremes (string leaves)
    double score_max = 0.0;
};

struct DecodedRows {
    std::vector<uint64_t> row_ids;
    std::vector<std::vector<std::string>> rows;
    std::vector<CellFailure> failures;
};

struct QueryResult {
    SelectionMask mask;
    std::optional<DecodedRows> projection;
    std::optional<AggregateResult> aggregate;
    QueryCounters counters;
    std::vector<LeafDiagnostics> leaves;
};

// Memoized per-column recall results for one immutable table instance.
// String decode and numeric decode use Hamming recall and are therefore
// backend-independent; dbam-scored digits feed numeric leaves under the
// dbam backend only.
class TableCaches {
public:
    explicit TableCaches(size_t columns);

    struct StringDecode {
        std::vector<std::string> values;
        std::vector<uint8_t> ok;
        std::vector<uint32_t> probes;  // positions probed per row
    };

    const StringDecode& string_decode(const EncodedTable&, const EncoderBank&, uint32_t col);
    // Flat rows x levels digit matrices.
    const std::vector<uint32_t>& hamming_digits(const EncodedTable&, const EncoderBank&,
                                                uint32_t col);
    const std::vector<uint32_t>& dbam_digits(const EncodedTable&, const EncoderBank&,
                                             uint32_t col, const DbamConfig& cfg);

private:
    struct ColumnSlot {
        std::once_flag string_once, hamming_once, dbam_once;
        StringDecode decoded;
        std::vector<uint32_t> hamming_digits, dbam_digits;
    };
    std::vector<std::unique_ptr<ColumnSlot>> slots_;
};

class QueryEngine {
public:
    QueryEngine(const EncodedTable& table, const EncoderBank& bank, Backend backend,
                DbamConfig cfg = {}, std::optional<ThresholdProfile> thresholds = std::nullopt,
                std::shared_ptr<TableCaches> caches = nullptr);

    Backend backend() const { return backend_; }
    const EncodedTable& table() const { return table_; }

    SelectionMask eval_string_leaf(uint32_t column, const std::string& literal);
    SelectionMask eval_numeric_leaf(uint32_t column, LeafOp op, double lo, double hi = 0.0);
    SelectionMask eval_predicate(const PredicateNode& pred);

    DecodedRows decode_selected(const SelectionMask& mask,
                                const std::vector<uint32_t>& columns);

    AggregateResult aggregate(const SelectionMask& mask, const AggregationSpec& spec);

    // Evaluates a full query: predicate, then either a projection of the
    // given columns (all columns if empty) or the aggregation.
    QueryResult run_query(const PredicateNode& pred,
                          const std::optional<AggregationSpec>& agg = std::nullopt,
                          const std::vector<uint32_t>& project_columns = {});

    const QueryCounters& counters() const { return counters_; }

private:
    const std::vector<uint32_t>& leaf_digits(uint32_t column);
    void account_numeric_recall(uint32_t column);
    void account_string_decode(uint32_t column, uint64_t probes);
    void account_numeric_decode(uint32_t column, uint64_t selected);
    void begin_query();

    const EncodedTable& table_;
    const EncoderBank& bank_;
    Backend backend_;
    DbamConfig cfg_;
    std::optional<ThresholdProfile> thresholds_;
    std::shared_ptr<TableCaches> caches_;
    QueryCounters counters_;
    std::vector<LeafDiagnostics> leaves_;
    std::vector<uint8_t> recall_counted_;  // per column, within the current query
};

}  // namespace hddb
