#pragma once

// Selection masks: one bit per row.

#include <cstdint>
#include <vector>

#include "hddb/common.hpp"

namespace hddb {

class SelectionMask {
public:
    SelectionMask() = default;
    explicit SelectionMask(uint64_t rows) : rows_(rows), words_((rows + 63) / 64, 0) {}

    uint64_t rows() const { return rows_; }
    bool get(uint64_t r) const { return (words_[r >> 6] >> (r & 63)) & 1; }
    void set(uint64_t r, bool v) {
        uint64_t m = uint64_t{1} << (r & 63);
        if (v)
            words_[r >> 6] |= m;
        else
            words_[r >> 6] &= ~m;
    }

    uint64_t count() const;
    std::vector<uint64_t> selected_rows() const;

    SelectionMask operator&(const SelectionMask& o) const;
    SelectionMask operator|(const SelectionMask& o) const;
    SelectionMask operator~() const;

    bool operator==(const SelectionMask& o) const = default;

private:
    void check(const SelectionMask& o) const {
        if (rows_ != o.rows_) throw DimensionError("selection mask length mismatch");
    }
    uint64_t rows_ = 0;
    std::vector<uint64_t> words_;

    friend SelectionMask mask_and(const SelectionMask&, const SelectionMask&);
};

}  // namespace hddb
