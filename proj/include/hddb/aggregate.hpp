#pragma once

// Aggregate result carrier. SUM over integer columns accumulates in a
// 128-bit integer so overflow is impossible by construction; AVG/MIN/MAX of
// an empty selection is an explicit null (the SQL NULL analogue).

#include <cstdint>
#include <string>

#include "hddb/common.hpp"

#include "json.hpp"

namespace hddb {

std::string int128_to_string(__int128 v);

struct AggregateResult {
    enum class Kind { Int, Real, Null } kind = Kind::Null;
    __int128 ival = 0;
    double rval = 0.0;

    static AggregateResult of_int(__int128 v) { return {Kind::Int, v, 0.0}; }
    static AggregateResult of_real(double v) { return {Kind::Real, 0, v}; }
    static AggregateResult null() { return {}; }

    bool operator==(const AggregateResult& o) const {
        if (kind != o.kind) return false;
        if (kind == Kind::Int) return ival == o.ival;
        if (kind == Kind::Real) return rval == o.rval;
        return true;
    }

    std::string to_string() const;
    nlohmann::json to_json() const;
};

// Canonical text for a numeric cell value: integral columns print as
// integers, real columns with shortest round-trip formatting.
std::string format_numeric(double v, bool integral);

}  // namespace hddb
