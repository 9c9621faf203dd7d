#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lobc/core.hpp"

namespace lobc::io {

using Json = nlohmann::ordered_json;
using Cell = std::optional<double>;

/// 17 significant digits, C locale decimal point, "null" for missing cells.
inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format_cell(const Cell& c) { return c ? format_number(*c) : "null"; }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<Cell>>& rows) {
    std::string s;
    for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
    s += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s += ',';
            s += format_cell(row[i]);
        }
        s += '\n';
    }
    write_text(path, s);
}

inline void write_profile(const std::filesystem::path& path, const Field& f, const std::string& value_name) {
    std::vector<std::vector<Cell>> rows;
    rows.reserve(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) rows.push_back({f.grid.node(j), f[j]});
    write_csv(path, {"r", value_name}, rows);
}

inline Json nullable(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

/// Reads a CSV written by write_csv; "null" cells become empty optionals.
inline std::vector<std::vector<Cell>> read_csv(const std::filesystem::path& path, std::vector<std::string>* header = nullptr) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path.string() + "'");
    std::string line;
    std::vector<std::vector<Cell>> rows;
    bool first = true;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::size_t a = 0;
        while (true) {
            const std::size_t b = line.find(',', a);
            cells.push_back(line.substr(a, b == std::string::npos ? std::string::npos : b - a));
            if (b == std::string::npos) break;
            a = b + 1;
        }
        if (first) {
            first = false;
            if (header) *header = cells;
            continue;
        }
        std::vector<Cell> row;
        for (const std::string& c : cells) row.push_back(c == "null" ? Cell{} : Cell{std::stod(c)});
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace lobc::io
