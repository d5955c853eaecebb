#pragma once

// Tabular results and their CSV / JSON serialization.
//
// CSV: one header row of column names, then one row per record, every value
// printed with 17 significant digits (NaN as "nan").
// JSON: {"spec": <echoed configuration>, "rows": [{column: value, ...}, ...]},
// NaN as null.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sca/errors.hpp"

namespace sca {

struct Dataset {
    nlohmann::json spec = nlohmann::json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        throw std::out_of_range("no column named " + name);
    }
    double at(std::size_t row, const std::string& name) const { return rows.at(row).at(column(name)); }
};

enum class OutputFormat { csv, json };

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text, const std::string& context) {
    const std::string s = trim(text);
    if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw Error(context + ": not a number: '" + s + "'");
    }
    return v;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const Dataset& d) {
    for (std::size_t i = 0; i < d.columns.size(); ++i) os << (i ? "," : "") << d.columns[i];
    os << '\n';
    for (const auto& row : d.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
        os << '\n';
    }
}

inline Dataset read_csv(std::istream& is, const std::string& source = "csv") {
    Dataset d;
    std::string line;
    if (!std::getline(is, line)) throw Error(source + ": empty file");
    for (auto& c : detail::split(line, ',')) d.columns.push_back(detail::trim(c));
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != d.columns.size()) {
            throw Error(source + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(d.columns.size()) + " fields, got " + std::to_string(cells.size()));
        }
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(detail::parse_double(c, source + ":" + std::to_string(line_no)));
        d.rows.push_back(std::move(row));
    }
    return d;
}

inline nlohmann::json to_json(const Dataset& d) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : d.rows) {
        nlohmann::json r = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (std::isnan(row[i])) {
                r[d.columns[i]] = nullptr;
            } else {
                r[d.columns[i]] = row[i];
            }
        }
        rows.push_back(std::move(r));
    }
    return {{"spec", d.spec}, {"columns", d.columns}, {"rows", rows}};
}

/// Row objects do not keep key order, so the writer also emits "columns".
/// Without it the keys of the first row are used, sorted.
inline Dataset from_json(const nlohmann::json& j, std::vector<std::string> columns = {}) {
    Dataset d;
    d.spec = j.value("spec", nlohmann::json::object());
    const auto& rows = j.at("rows");
    if (columns.empty() && j.contains("columns")) columns = j.at("columns").get<std::vector<std::string>>();
    if (columns.empty() && !rows.empty()) {
        for (const auto& [k, _] : rows.front().items()) columns.push_back(k);
    }
    d.columns = std::move(columns);
    for (const auto& r : rows) {
        std::vector<double> row;
        for (const auto& c : d.columns) {
            const auto& v = r.at(c);
            row.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
        }
        d.rows.push_back(std::move(row));
    }
    return d;
}

inline void write_dataset(std::ostream& os, const Dataset& d, OutputFormat f) {
    if (f == OutputFormat::csv) {
        write_csv(os, d);
    } else {
        os << to_json(d).dump(2) << '\n';
    }
}

inline void write_dataset(const std::string& path, const Dataset& d, OutputFormat f) {
    std::ofstream os(path);
    if (!os) throw Error(path + ": cannot open for writing");
    write_dataset(os, d, f);
    if (!os) throw Error(path + ": write failed");
}

}  // namespace sca
