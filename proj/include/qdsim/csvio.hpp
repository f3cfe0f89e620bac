#pragma once

#include <string>
#include <vector>

namespace qd {

// Self-describing CSV: first line is "# <comment>" carrying tool version,
// config hash, and column units; second line the column names; the rest
// data cells. Cells are stored as strings so label and numeric columns mix.
struct CsvTable {
    std::string comment;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const;  // -1 when absent
    std::vector<double> numeric_column(const std::string& name) const;  // SchemaError
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);  // SchemaError on unreadable/malformed input

// Standard first-line comment: "<tool> <version> | config=<hex hash> | <units>".
std::string csv_comment(std::uint64_t config_hash, const std::string& units);

}  // namespace qd
