#pragma once

// Reference engine: evaluates predicates and aggregations by scanning the
// plaintext table directly. Never touches hypervectors or cell images; the
// encoded pipeline is validated against this scan.

#include <cstdint>
#include <string>
#include <vector>

#include "hddb/aggregate.hpp"
#include "hddb/encoding.hpp"
#include "hddb/mask.hpp"
#include "hddb/predicate.hpp"
#include "hddb/table.hpp"

namespace hddb {

class PlainScanEngine {
public:
    PlainScanEngine(const PlainTable& table, const EncodingPlan& plan);

    const PlainTable& table() const { return table_; }

    SelectionMask eval(const PredicateNode& pred) const;

    // Projection of selected rows; columns by plan index.
    std::vector<std::vector<std::string>> project(const SelectionMask& mask,
                                                  const std::vector<uint32_t>& columns) const;

    AggregateResult aggregate(const SelectionMask& mask, const AggregationSpec& spec) const;

private:
    const PlainTable& table_;
    EncodingPlan plan_;
    // Parsed numeric columns (empty for string columns).
    std::vector<std::vector<double>> numeric_;
};

}  // namespace hddb
