#include "hddb/mask.hpp"

#include <bit>

namespace hddb {

uint64_t SelectionMask::count() const {
    uint64_t c = 0;
    for (uint64_t w : words_) c += uint64_t(std::popcount(w));
    return c;
}

std::vector<uint64_t> SelectionMask::selected_rows() const {
    std::vector<uint64_t> out;
    out.reserve(count());
    for (uint64_t r = 0; r < rows_; ++r)
        if (get(r)) out.push_back(r);
    return out;
}

SelectionMask SelectionMask::operator&(const SelectionMask& o) const {
    check(o);
    SelectionMask out(rows_);
    for (size_t i = 0; i < words_.size(); ++i) out.words_[i] = words_[i] & o.words_[i];
    return out;
}

SelectionMask SelectionMask::operator|(const SelectionMask& o) const {
    check(o);
    SelectionMask out(rows_);
    for (size_t i = 0; i < words_.size(); ++i) out.words_[i] = words_[i] | o.words_[i];
    return out;
}

SelectionMask SelectionMask::operator~() const {
    SelectionMask out(rows_);
    for (size_t i = 0; i < words_.size(); ++i) out.words_[i] = ~words_[i];
    uint64_t rem = rows_ & 63;
    if (rem) out.words_.back() &= (uint64_t{1} << rem) - 1;
    return out;
}

}  // namespace hddb
