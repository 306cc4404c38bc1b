#pragma once

// CSV, JSON and gnuplot data files.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wdlab/error.hpp"

namespace wdlab {

/// Columns of doubles; the first column is the row key (usually n).
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Report {
    std::string stem;
    Table table;
    nlohmann::json summary;
};

inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Long-format CSV: one row per (key, statistic).
inline std::string table_csv(const Table& t) {
    if (t.columns.empty()) throw LabError("emit_report: table has no columns");
    std::string out = t.columns.front() + ",statistic,value\n";
    for (const auto& row : t.rows)
        for (std::size_t c = 1; c < t.columns.size(); ++c)
            out += format_number(row.at(0)) + "," + t.columns[c] + "," + format_number(row.at(c)) + "\n";
    return out;
}

/// Whitespace-separated columns with a commented header, for gnuplot.
inline std::string table_dat(const Table& t) {
    std::string out = "#";
    for (const auto& c : t.columns) out += " " + c;
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out += (c ? " " : "") + format_number(row[c]);
        out += "\n";
    }
    return out;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw LabError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw LabError("cannot write '" + path.string() + "'");
}

}  // namespace detail

/// Writes <stem>.csv, <stem>.json and <stem>.dat into dir.
inline std::vector<std::filesystem::path> emit_report(const std::filesystem::path& dir, const Report& report) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw LabError("unwritable output directory '" + dir.string() + "'");
    const auto csv = dir / (report.stem + ".csv");
    const auto js = dir / (report.stem + ".json");
    const auto dat = dir / (report.stem + ".dat");
    detail::write_file(csv, table_csv(report.table));
    detail::write_file(js, report.summary.dump(2) + "\n");
    detail::write_file(dat, table_dat(report.table));
    return {csv, js, dat};
}

}  // namespace wdlab
