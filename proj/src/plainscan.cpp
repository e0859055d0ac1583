#include "hddb/plainscan.hpp"

#include <cerrno>
#include <cstdlib>

namespace hddb {

PlainScanEngine::PlainScanEngine(const PlainTable& table, const EncodingPlan& plan)
    : table_(table), plan_(plan) {
    plan_.validate();
    if (table.column_names.size() != plan_.columns.size())
        throw DomainError("plaintext table and plan column counts differ");
    numeric_.resize(plan_.columns.size());
    for (uint32_t c = 0; c < plan_.columns.size(); ++c) {
        if (plan_.columns[c].kind != ColumnKind::Numeric) continue;
        auto& vals = numeric_[c];
        vals.reserve(table.row_count());
        for (const auto& row : table.rows) {
            errno = 0;
            char* end = nullptr;
            double v = std::strtod(row[c].c_str(), &end);
            if (end == row[c].c_str() || *end != '\0' || errno == ERANGE)
                throw DomainError("malformed numeric cell '" + row[c] + "' in column " +
                                  plan_.columns[c].name);
            vals.push_back(v);
        }
    }
}

SelectionMask PlainScanEngine::eval(const PredicateNode& pred) const {
    uint64_t rows = table_.row_count();
    if (pred.kind == PredicateNode::Kind::And) return eval(*pred.left) & eval(*pred.right);
    if (pred.kind == PredicateNode::Kind::Or) return eval(*pred.left) | eval(*pred.right);

    SelectionMask mask(rows);
    uint32_t c = pred.column;
    switch (pred.op) {
        case LeafOp::EqStr:
            for (uint64_t r = 0; r < rows; ++r) mask.set(r, table_.rows[r][c] == pred.str_value);
            break;
        case LeafOp::EqNum:
            for (uint64_t r = 0; r < rows; ++r) mask.set(r, numeric_[c][r] == pred.num_lo);
            break;
        case LeafOp::Lt:
            for (uint64_t r = 0; r < rows; ++r) mask.set(r, numeric_[c][r] < pred.num_lo);
            break;
        case LeafOp::Le:
            for (uint64_t r = 0; r < rows; ++r) mask.set(r, numeric_[c][r] <= pred.num_lo);
            break;
        case LeafOp::Gt:
            for (uint64_t r = 0; r < rows; ++r) mask.set(r, numeric_[c][r] > pred.num_lo);
            break;
        case LeafOp::Ge:
            for (uint64_t r = 0; r < rows; ++r) mask.set(r, numeric_[c][r] >= pred.num_lo);
            break;
        case LeafOp::Between:
            for (uint64_t r = 0; r < rows; ++r)
                mask.set(r, numeric_[c][r] >= pred.num_lo && numeric_[c][r] <= pred.num_hi);
            break;
    }
    return mask;
}

std::vector<std::vector<std::string>> PlainScanEngine::project(
    const SelectionMask& mask, const std::vector<uint32_t>& columns) const {
    std::vector<std::vector<std::string>> out;
    for (uint64_t r = 0; r < table_.row_count(); ++r) {
        if (!mask.get(r)) continue;
        std::vector<std::string> row;
        row.reserve(columns.size());
        for (uint32_t c : columns) row.push_back(table_.rows[r][c]);
        out.push_back(std::move(row));
    }
    return out;
}

AggregateResult PlainScanEngine::aggregate(const SelectionMask& mask,
                                           const AggregationSpec& spec) const {
    if (spec.function == AggFunction::Count) return AggregateResult::of_int(__int128(mask.count()));
    uint32_t c = spec.resolve(plan_);
    bool integral = plan_.columns[c].numeric_params.integral;
    const auto& vals = numeric_[c];

    uint64_t n = 0;
    __int128 isum = 0;
    double rsum = 0.0;
    double mn = 0.0, mx = 0.0;
    for (uint64_t r = 0; r < table_.row_count(); ++r) {
        if (!mask.get(r)) continue;
        double v = vals[r];
        if (n == 0) {
            mn = mx = v;
        } else {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        if (integral)
            isum += __int128(int64_t(v));
        else
            rsum += v;
        ++n;
    }
    switch (spec.function) {
        case AggFunction::Sum:
            if (n == 0) return AggregateResult::of_int(0);
            return integral ? AggregateResult::of_int(isum) : AggregateResult::of_real(rsum);
        case AggFunction::Avg:
            if (n == 0) return AggregateResult::null();
            return AggregateResult::of_real((integral ? double(isum) : rsum) / double(n));
        case AggFunction::Min:
            if (n == 0) return AggregateResult::null();
            return integral ? AggregateResult::of_int(__int128(int64_t(mn)))
                            : AggregateResult::of_real(mn);
        case AggFunction::Max:
            if (n == 0) return AggregateResult::null();
            return integral ? AggregateResult::of_int(__int128(int64_t(mx)))
                            : AggregateResult::of_real(mx);
        case AggFunction::Count:
            break;
    }
    return AggregateResult::null();
}

}  // namespace hddb
