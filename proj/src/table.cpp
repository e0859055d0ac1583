#include "hddb/table.hpp"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>

namespace hddb {

using nlohmann::json;

PlainTable PlainTable::from_csv(const CsvTable& csv) {
    PlainTable t;
    t.column_names = csv.header;
    t.rows = csv.rows;
    return t;
}

CsvTable PlainTable::to_csv() const {
    CsvTable csv;
    csv.header = column_names;
    csv.rows = rows;
    return csv;
}

EncodedColumn::EncodedColumn(ColumnPlan plan, uint64_t row_count)
    : plan_(std::move(plan)),
      row_count_(row_count),
      words_per_value_((plan_.dim() + 63) / 64),
      cells_per_value_((plan_.dim() + 2) / 3),
      bits_(row_count * words_per_value_ + 1, 0),
      cells_(row_count * cells_per_value_, 0) {}

Hypervector EncodedColumn::row_hv(uint64_t r) const {
    Hypervector hv(dim());
    auto src = row_bits(r);
    std::copy(src.begin(), src.end(), hv.words().begin());
    return hv;
}

EncodedTable::EncodedTable(EncodingPlan plan, uint64_t row_count)
    : plan_(std::move(plan)), row_count_(row_count) {
    plan_.validate();
    columns_.reserve(plan_.columns.size());
    for (const auto& c : plan_.columns) columns_.emplace_back(c, row_count);
}

const EncodedColumn& EncodedTable::column(std::string_view name) const {
    auto idx = plan_.column_index(name);
    if (!idx) throw DomainError("unknown column: " + std::string(name));
    return columns_[*idx];
}

uint64_t EncodedTable::cells_per_row() const {
    uint64_t total = 0;
    for (const auto& c : columns_) total += c.cells_per_value();
    return total;
}

json EncodedTable::manifest() const {
    json cols = json::array();
    for (const auto& c : columns_) {
        cols.push_back({{"name", c.plan().name},
                        {"logical_bits", c.dim()},
                        {"cells_per_value", c.cells_per_value()}});
    }
    return json{{"version", kVersion},
                {"plan", plan_.to_json()},
                {"plan_hash", plan_.hash()},
                {"row_count", row_count_},
                {"columns", std::move(cols)},
                {"warnings", warnings_}};
}

EncoderBank::EncoderBank(const EncodingPlan& plan) : plan_(plan) {
    plan_.validate();
    string_encoders_.resize(plan_.columns.size());
    numeric_encoders_.resize(plan_.columns.size());
    for (size_t i = 0; i < plan_.columns.size(); ++i) {
        const auto& c = plan_.columns[i];
        if (c.kind == ColumnKind::String)
            string_encoders_[i] = std::make_unique<StringEncoder>(c.string_params);
        else
            numeric_encoders_[i] = std::make_unique<NumericEncoder>(c.numeric_params);
    }
}

const StringEncoder& EncoderBank::string_encoder(uint32_t c) const {
    if (!string_encoders_[c]) throw DomainError(plan_.columns[c].name + " is not a string column");
    return *string_encoders_[c];
}

const NumericEncoder& EncoderBank::numeric_encoder(uint32_t c) const {
    if (!numeric_encoders_[c]) throw DomainError(plan_.columns[c].name + " is not a numeric column");
    return *numeric_encoders_[c];
}

double EncoderBank::parse_numeric(uint32_t c, const std::string& cell) const {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
        throw DomainError("malformed numeric literal '" + cell + "' in column " +
                          plan_.columns[c].name);
    return v;
}

EncodedTable encode_table(const PlainTable& rows, const EncodingPlan& plan,
                          const EncoderBank& bank) {
    if (rows.column_names.size() != plan.columns.size())
        throw DomainError("table has " + std::to_string(rows.column_names.size()) +
                          " columns, plan expects " + std::to_string(plan.columns.size()));
    for (size_t i = 0; i < plan.columns.size(); ++i) {
        if (rows.column_names[i] != plan.columns[i].name)
            throw DomainError("column " + std::to_string(i) + " is '" + rows.column_names[i] +
                              "' but the plan names it '" + plan.columns[i].name + "'");
    }
    EncodedTable table(plan, rows.row_count());
    for (const auto& cp : plan.columns) {
        if (cp.kind == ColumnKind::Numeric && !cp.numeric_params.injective_for_integers())
            table.add_warning("column " + cp.name +
                              ": binning is not injective for integers; numeric predicates "
                              "resolve at finest-bin granularity");
    }

    // First failing cell in row-major order wins, matching a serial scan.
    std::mutex fail_mu;
    uint64_t fail_row = ~uint64_t{0};
    uint32_t fail_col = 0;
    std::string fail_reason;

    for (uint32_t c = 0; c < plan.columns.size(); ++c) {
        EncodedColumn& col = table.column(c);
        parallel_for(rows.row_count(), [&](size_t begin, size_t end) {
            for (size_t r = begin; r < end; ++r) {
                const std::string& cell = rows.rows[r][c];
                try {
                    Hypervector hv = bank.is_string(c)
                                         ? bank.string_encoder(c).encode(cell)
                                         : bank.numeric_encoder(c).encode(
                                               bank.parse_numeric(c, cell));
                    auto dst = col.row_bits(r);
                    auto src = hv.words();
                    std::copy(src.begin(), src.end(), dst.begin());
                    col.pack_row(r);
                } catch (const Error& e) {
                    std::lock_guard<std::mutex> lock(fail_mu);
                    if (r < fail_row || (r == fail_row && c < fail_col)) {
                        fail_row = r;
                        fail_col = c;
                        fail_reason = e.what();
                    }
                }
            }
        });
    }
    if (fail_row != ~uint64_t{0})
        throw DomainError("encode failed at row " + std::to_string(fail_row) + ", column '" +
                          plan.columns[fail_col].name + "': " + fail_reason);
    return table;
}

EncodedTable with_noise(const EncodedTable& table, double cell_fraction, uint64_t seed) {
    if (cell_fraction < 0.0 || cell_fraction > 1.0)
        throw DomainError("noise cell_fraction must lie in [0, 1]");
    EncodedTable out = table;
    size_t ncols = table.column_count();
    for (uint32_t c = 0; c < ncols; ++c) {
        EncodedColumn& col = out.column(c);
        parallel_for(table.row_count(), [&](size_t begin, size_t end) {
            for (size_t r = begin; r < end; ++r) {
                NoiseSpec spec{cell_fraction, derive_seed(seed, r * ncols + c)};
                inject_noise_span(col.row_cells(r), spec);
                col.unpack_row(r);
            }
        });
    }
    return out;
}

// --- persistence -------------------------------------------------------------

namespace {

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw IoError("truncated image file");
    return v;
}

}  // namespace

void write_image(const EncodedTable& table, const std::string& image_path) {
    std::ofstream out(image_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open image for writing: " + image_path);
    out.write(kImageMagic, 4);
    put<uint32_t>(out, kImageVersion);
    put<uint64_t>(out, table.row_count());
    put<uint32_t>(out, uint32_t(table.column_count()));
    for (size_t c = 0; c < table.column_count(); ++c) {
        put<uint32_t>(out, table.column(c).dim());
        put<uint32_t>(out, table.column(c).cells_per_value());
    }
    for (size_t c = 0; c < table.column_count(); ++c) {
        const auto& col = table.column(c);
        for (uint64_t r = 0; r < table.row_count(); ++r) {
            auto cells = col.row_cells(r);
            out.write(reinterpret_cast<const char*>(cells.data()),
                      std::streamsize(cells.size()));
        }
    }
    if (!out) throw IoError("failed writing image: " + image_path);
}

EncodedTable read_image(const std::string& image_path, const EncodingPlan& plan) {
    std::ifstream in(image_path, std::ios::binary);
    if (!in) throw IoError("cannot open image: " + image_path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kImageMagic, 4) != 0)
        throw IoError("not a flash image file: " + image_path);
    auto version = get<uint32_t>(in);
    if (version != kImageVersion)
        throw IoError("unsupported image version " + std::to_string(version));
    auto row_count = get<uint64_t>(in);
    auto column_count = get<uint32_t>(in);
    if (column_count != plan.columns.size())
        throw IoError("image has " + std::to_string(column_count) + " columns, plan expects " +
                      std::to_string(plan.columns.size()));
    for (uint32_t c = 0; c < column_count; ++c) {
        auto bits = get<uint32_t>(in);
        auto cells = get<uint32_t>(in);
        if (bits != plan.columns[c].dim() || cells != (bits + 2) / 3)
            throw IoError("image column " + std::to_string(c) +
                          " geometry does not match the plan");
    }
    EncodedTable table(plan, row_count);
    for (uint32_t c = 0; c < column_count; ++c) {
        EncodedColumn& col = table.column(c);
        for (uint64_t r = 0; r < row_count; ++r) {
            auto cells = col.row_cells(r);
            in.read(reinterpret_cast<char*>(cells.data()), std::streamsize(cells.size()));
        }
        if (!in) throw IoError("truncated image file");
        parallel_for(row_count, [&](size_t begin, size_t end) {
            for (size_t r = begin; r < end; ++r) col.unpack_row(r);
        });
    }
    return table;
}

void write_manifest(const EncodedTable& table, const std::string& manifest_path) {
    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) throw IoError("cannot open manifest for writing: " + manifest_path);
    out << table.manifest().dump(2) << "\n";
    if (!out) throw IoError("failed writing manifest: " + manifest_path);
}

EncodingPlan read_manifest(const std::string& manifest_path, uint64_t* row_count_out,
                           std::vector<std::string>* warnings_out) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest: " + manifest_path);
    json j = json::parse(in, nullptr, true);
    EncodingPlan plan = EncodingPlan::from_json(j.at("plan"));
    if (row_count_out) *row_count_out = j.at("row_count").get<uint64_t>();
    if (warnings_out && j.contains("warnings"))
        *warnings_out = j.at("warnings").get<std::vector<std::string>>();
    return plan;
}

}  // namespace hddb
