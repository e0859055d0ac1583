#pragma once

// WHERE-style predicates: string equality, numeric comparisons and BETWEEN,
// combined with AND/OR. Grammar (keywords case-insensitive):
//
//   expr    := and_expr (OR and_expr)*
//   and_expr:= primary (AND primary)*
//   primary := '(' expr ')' | leaf
//   leaf    := ident '=' string
//            | ident ('=' | '<' | '<=' | '>' | '>=') number
//            | ident BETWEEN number AND number

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hddb/common.hpp"
#include "hddb/encoding.hpp"

namespace hddb {

enum class LeafOp { EqStr, EqNum, Lt, Le, Gt, Ge, Between };

struct PredicateNode {
    enum class Kind { Leaf, And, Or } kind = Kind::Leaf;

    // Leaf payload.
    LeafOp op = LeafOp::EqStr;
    uint32_t column = 0;
    std::string column_name;
    std::string str_value;
    double num_lo = 0.0, num_hi = 0.0;  // bounds; single-bound ops use num_lo

    // Source span for diagnostics.
    size_t span_begin = 0, span_end = 0;

    std::unique_ptr<PredicateNode> left, right;
};

using Predicate = std::unique_ptr<PredicateNode>;

// Parses and type-checks against the plan. Throws ParseError with the
// offending offset on syntax errors, unknown columns, or type mismatches.
Predicate parse_predicate(const std::string& text, const EncodingPlan& plan);

std::string to_string(const PredicateNode& node);

// Columns referenced by the predicate, in first-use order.
std::vector<uint32_t> referenced_columns(const PredicateNode& node);

// --- aggregation -------------------------------------------------------------

enum class AggFunction { Count, Sum, Avg, Min, Max };

AggFunction agg_from_name(const std::string& name);
std::string agg_name(AggFunction f);

struct AggregationSpec {
    AggFunction function = AggFunction::Count;
    std::string column;  // empty for COUNT

    // Resolves/validates the target column against the plan.
    uint32_t resolve(const EncodingPlan& plan) const;
};

}  // namespace hddb
