#pragma once

// Seeded generators for fact-table-shaped synthetic data (integer measure
// columns plus categorical string columns) and for random predicate / query
// suites over such tables.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hddb/encoding.hpp"
#include "hddb/predicate.hpp"
#include "hddb/table.hpp"

#include "json.hpp"

namespace hddb {

std::vector<std::string> preset_names();
std::vector<ColumnSpec> preset_schema(const std::string& preset);
EncodingPlan plan_for_preset(const std::string& preset, uint32_t row_dim, uint64_t master_seed);

// Column schema as JSON, for sweeping externally generated CSVs:
//   [{"name":"qty","kind":"numeric","domain_lo":0,"domain_hi":1000,
//     "integral":true,"bins_per_level":100,"levels":4},
//    {"name":"city","kind":"string","max_len":16}]
std::vector<ColumnSpec> schema_from_json(const nlohmann::json& j);
nlohmann::json schema_to_json(const std::vector<ColumnSpec>& schema);

PlainTable gen_table(const std::string& preset, uint64_t rows, uint64_t seed);

struct GeneratedQuery {
    std::string text;
    std::optional<AggregationSpec> agg;
};

enum class QueryFamily { Filter, FilterAggregate };

// Random queries: uniform column choice; string literals drawn mostly from
// actual table values, numeric bounds uniform over the column domain
// (equality literals mostly from actual values). Half the predicates have
// two leaves joined by AND/OR.
std::vector<GeneratedQuery> gen_queries(const PlainTable& table,
                                        const std::vector<ColumnSpec>& schema,
                                        QueryFamily family, uint32_t count, uint64_t seed);

}  // namespace hddb
