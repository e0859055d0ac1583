#pragma once

// Minimal RFC-4180-style CSV: header row, quoted fields with "" escapes.

#include <iosfwd>
#include <string>
#include <vector>

namespace hddb {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);
void write_csv(std::ostream& out, const CsvTable& table);

}  // namespace hddb
