#pragma once

// Plaintext and encoded tables. Encoded columns hold two images of every
// cell value: the bit form (word-packed hypervectors, the unit the decode
// and exact-hamming paths operate on) and the TLC cell form (one byte per
// cell, the unit noise injection and the in-situ search model operate on).
// The bit form is always unpack(cells), so a noisy instance rebuilds its
// bit image from the perturbed cells.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hddb/common.hpp"
#include "hddb/csv.hpp"
#include "hddb/encoding.hpp"
#include "hddb/tlc.hpp"

#include "json.hpp"

namespace hddb {

struct PlainTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> rows;

    size_t row_count() const { return rows.size(); }
    static PlainTable from_csv(const CsvTable& csv);
    CsvTable to_csv() const;
};

struct CellFailure {
    uint64_t row;
    std::string column;
    std::string reason;
};

class EncodedColumn {
public:
    EncodedColumn(ColumnPlan plan, uint64_t row_count);

    const ColumnPlan& plan() const { return plan_; }
    uint32_t dim() const { return plan_.dim(); }
    uint32_t words_per_value() const { return words_per_value_; }
    uint32_t cells_per_value() const { return cells_per_value_; }
    uint64_t row_count() const { return row_count_; }

    std::span<const uint64_t> row_bits(uint64_t r) const {
        return {bits_.data() + r * words_per_value_, words_per_value_};
    }
    std::span<uint64_t> row_bits(uint64_t r) {
        return {bits_.data() + r * words_per_value_, words_per_value_};
    }
    std::span<const uint8_t> row_cells(uint64_t r) const {
        return {cells_.data() + r * cells_per_value_, cells_per_value_};
    }
    std::span<uint8_t> row_cells(uint64_t r) {
        return {cells_.data() + r * cells_per_value_, cells_per_value_};
    }

    Hypervector row_hv(uint64_t r) const;

    // Rebuild one row's images from the other representation.
    void pack_row(uint64_t r) { pack_words(row_bits(r).data(), dim(), row_cells(r).data()); }
    void unpack_row(uint64_t r) { unpack_cells(row_cells(r).data(), dim(), row_bits(r).data()); }

private:
    ColumnPlan plan_;
    uint64_t row_count_;
    uint32_t words_per_value_;
    uint32_t cells_per_value_;
    std::vector<uint64_t> bits_;   // row-major, one guard word at the end
    std::vector<uint8_t> cells_;   // row-major
};

class EncodedTable {
public:
    EncodedTable(EncodingPlan plan, uint64_t row_count);

    const EncodingPlan& plan() const { return plan_; }
    uint64_t row_count() const { return row_count_; }
    size_t column_count() const { return columns_.size(); }
    const EncodedColumn& column(size_t i) const { return columns_[i]; }
    EncodedColumn& column(size_t i) { return columns_[i]; }
    const EncodedColumn& column(std::string_view name) const;

    // Per-row TLC cells summed over columns.
    uint64_t cells_per_row() const;

    const std::vector<std::string>& warnings() const { return warnings_; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

    nlohmann::json manifest() const;

private:
    EncodingPlan plan_;
    uint64_t row_count_;
    std::vector<EncodedColumn> columns_;
    std::vector<std::string> warnings_;
};

// Encoder bank: one constructed encoder per plan column, reusable across
// tables that share a plan.
class EncoderBank {
public:
    explicit EncoderBank(const EncodingPlan& plan);

    const EncodingPlan& plan() const { return plan_; }
    const ColumnPlan& column_plan(uint32_t c) const { return plan_.columns[c]; }
    bool is_string(uint32_t c) const { return plan_.columns[c].kind == ColumnKind::String; }
    const StringEncoder& string_encoder(uint32_t c) const;
    const NumericEncoder& numeric_encoder(uint32_t c) const;

    // Parses a plaintext cell per the column kind; throws DomainError on a
    // malformed numeric literal.
    double parse_numeric(uint32_t c, const std::string& cell) const;

private:
    EncodingPlan plan_;
    std::vector<std::unique_ptr<StringEncoder>> string_encoders_;
    std::vector<std::unique_ptr<NumericEncoder>> numeric_encoders_;
};

// Encodes every cell; the first offending cell aborts with a DomainError
// carrying (row, column, reason). Row-parallel and deterministic.
EncodedTable encode_table(const PlainTable& rows, const EncodingPlan& plan,
                          const EncoderBank& bank);

// Copy of `table` with a fraction of cells shifted +-1 level; bit images are
// re-derived from the noisy cells. Seeded per (row, column) so the result is
// independent of traversal order.
EncodedTable with_noise(const EncodedTable& table, double cell_fraction, uint64_t seed);

// --- persistence -------------------------------------------------------------

void write_image(const EncodedTable& table, const std::string& image_path);
// Loads cells from an image and re-derives bit images; the manifest supplies
// the plan.
EncodedTable read_image(const std::string& image_path, const EncodingPlan& plan);

void write_manifest(const EncodedTable& table, const std::string& manifest_path);
EncodingPlan read_manifest(const std::string& manifest_path, uint64_t* row_count_out,
                           std::vector<std::string>* warnings_out = nullptr);

}  // namespace hddb
