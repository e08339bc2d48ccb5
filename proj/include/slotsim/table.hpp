#pragma once

// Delimited-text tables: '#'-prefixed metadata lines, then a column-name line,
// a units line, and tab-separated numeric rows. Diff-friendly and archival.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace slotsim {

struct Table {
    std::vector<std::pair<std::string, std::string>> meta;  // key -> value
    std::vector<std::string> columns;
    std::vector<std::string> units;
    std::vector<std::vector<double>> rows;

    std::string meta_value(const std::string& key) const {
        for (const auto& [k, v] : meta)
            if (k == key) return v;
        throw std::runtime_error("table metadata key missing: " + key);
    }
    bool has_meta(const std::string& key) const {
        for (const auto& [k, v] : meta)
            if (k == key) return true;
        return false;
    }
    int column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline void write_table(std::ostream& os, const Table& t) {
    if (t.columns.size() != t.units.size())
        throw std::invalid_argument("write_table: column/unit count mismatch");
    os << std::setprecision(17);
    for (const auto& [k, v] : t.meta) os << "# " << k << " " << v << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << t.columns[i] << (i + 1 < t.columns.size() ? "\t" : "\n");
    for (std::size_t i = 0; i < t.units.size(); ++i)
        os << t.units[i] << (i + 1 < t.units.size() ? "\t" : "\n");
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size())
            throw std::invalid_argument("write_table: row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i)
            os << row[i] << (i + 1 < row.size() ? "\t" : "\n");
    }
}

inline void write_table(const std::string& path, const Table& t) {
    std::ofstream os(path, std::ios::binary);  // LF line endings everywhere
    if (!os) throw std::runtime_error("cannot open table for writing: " + path);
    write_table(os, t);
}

inline std::string table_to_string(const Table& t) {
    std::ostringstream ss;
    write_table(ss, t);
    return ss.str();
}

inline Table read_table(std::istream& is) {
    Table t;
    std::string line;
    std::size_t line_no = 0;
    int header_state = 0;  // 0: columns pending, 1: units pending, 2: data
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string key;
            ss >> key;
            std::string value;
            std::getline(ss, value);
            const auto pos = value.find_first_not_of(' ');
            value = pos == std::string::npos ? "" : value.substr(pos);
            t.meta.emplace_back(key, value);
            continue;
        }
        std::istringstream ss(line);
        if (header_state == 0) {
            std::string name;
            while (ss >> name) t.columns.push_back(name);
            header_state = 1;
            continue;
        }
        if (header_state == 1) {
            std::string unit;
            while (ss >> unit) t.units.push_back(unit);
            if (t.units.size() != t.columns.size())
                throw std::runtime_error("table units line width mismatch at line " +
                                         std::to_string(line_no));
            header_state = 2;
            continue;
        }
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (!ss.eof())
            throw std::runtime_error("non-numeric table data at line " + std::to_string(line_no));
        if (row.size() != t.columns.size())
            throw std::runtime_error("table row width mismatch at line " + std::to_string(line_no));
        t.rows.push_back(std::move(row));
    }
    if (header_state < 2 && t.columns.empty())
        throw std::runtime_error("table has no column header");
    return t;
}

inline Table read_table(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open table: " + path);
    return read_table(is);
}

} // namespace slotsim
