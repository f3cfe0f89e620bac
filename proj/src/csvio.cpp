#include "qdsim/csvio.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "qdsim/config.hpp"
#include "qdsim/errors.hpp"

namespace qd {
namespace {

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

int CsvTable::column_index(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
    const int idx = column_index(name);
    if (idx < 0) throw SchemaError("CSV has no column '" + name + "'");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (static_cast<size_t>(idx) >= row.size())
            throw SchemaError("CSV row is short of column '" + name + "'");
        out.push_back(to_double(row[static_cast<size_t>(idx)], "column " + name));
    }
    return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write '" + path + "'");
    if (!table.comment.empty()) out << "# " << table.comment << "\n";
    for (size_t i = 0; i < table.columns.size(); ++i)
        out << table.columns[i] << (i + 1 < table.columns.size() ? "," : "");
    out << "\n";
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (!have_header && table.comment.empty())
                table.comment = line.size() > 2 ? line.substr(2) : "";
            continue;
        }
        if (!have_header) {
            table.columns = split_cells(line);
            if (table.columns.empty()) throw SchemaError("CSV header row is empty");
            have_header = true;
            continue;
        }
        auto cells = split_cells(line);
        if (cells.size() != table.columns.size())
            throw SchemaError("CSV row width differs from header in '" + path + "'");
        table.rows.push_back(std::move(cells));
    }
    if (!have_header) throw SchemaError("CSV '" + path + "' has no header row");
    return table;
}

std::string csv_comment(std::uint64_t config_hash, const std::string& units) {
    std::ostringstream out;
    out << kToolName << " " << kToolVersion << " | config=" << std::hex << config_hash << std::dec
        << " | " << units;
    return out.str();
}

}  // namespace qd
