#include "hddb/aggregate.hpp"

#include <charconv>
#include <cmath>

namespace hddb {

std::string int128_to_string(__int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? (unsigned __int128)(-(v + 1)) + 1 : (unsigned __int128)v;
    std::string digits;
    while (u) {
        digits.push_back(char('0' + int(u % 10)));
        u /= 10;
    }
    if (neg) digits.push_back('-');
    return {digits.rbegin(), digits.rend()};
}

std::string AggregateResult::to_string() const {
    switch (kind) {
        case Kind::Int: return int128_to_string(ival);
        case Kind::Real: return format_numeric(rval, false);
        case Kind::Null: return "null";
    }
    return "";
}

nlohmann::json AggregateResult::to_json() const {
    switch (kind) {
        case Kind::Int: {
            // Emit as a JSON number when it fits, else as a decimal string.
            if (ival >= INT64_MIN && ival <= INT64_MAX) return int64_t(ival);
            return int128_to_string(ival);
        }
        case Kind::Real: return rval;
        case Kind::Null: return nullptr;
    }
    return nullptr;
}

std::string format_numeric(double v, bool integral) {
    if (integral && std::floor(v) == v && std::abs(v) < 9.2e18)
        return std::to_string(int64_t(v));
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace hddb
