#include "hddb/csv.hpp"

#include <fstream>
#include <sstream>

#include "hddb/common.hpp"

namespace hddb {

namespace {

// Parses one record, honoring quoted fields that may span lines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(char(c));
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get();
            fields.push_back(std::move(field));
            return true;
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(char(c));
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    if (!read_record(in, table.header)) throw IoError("CSV input is empty (no header row)");
    std::vector<std::string> fields;
    while (read_record(in, fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
        if (fields.size() != table.header.size())
            throw IoError("CSV row " + std::to_string(table.rows.size() + 1) + " has " +
                          std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(table.header.size()));
        table.rows.push_back(fields);
    }
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open CSV file: " + path);
    return read_csv(in);
}

std::string csv_escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out.put(',');
        out << csv_escape(fields[i]);
    }
    out.put('\n');
}

void write_csv(std::ostream& out, const CsvTable& table) {
    write_csv_row(out, table.header);
    for (const auto& row : table.rows) write_csv_row(out, row);
}

}  // namespace hddb
