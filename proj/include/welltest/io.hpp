#pragma once

// CSV ingestion and output. Pressure files carry `time,pressure`; rate files
// carry contiguous `start,end,rate` intervals.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "welltest/errors.hpp"
#include "welltest/posterior.hpp"

namespace welltest::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

struct Table {
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> line_numbers;
};

// Reads a numeric table whose header must match `columns` exactly.
inline Table read_table(const std::filesystem::path& path, const std::vector<std::string>& columns) {
    const std::string file = path.string();
    std::ifstream in(path);
    if (!in) throw ParseError(file, 0, 0, "cannot open file");
    std::string line;
    std::size_t row = 0;
    bool header = false;
    Table t;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (!header) {
            std::string expected;
            for (std::size_t c = 0; c < columns.size(); ++c) expected += (c ? "," : "") + columns[c];
            if (fields.size() != columns.size()) throw ParseError(file, row, 1, "header must be `" + expected + "`");
            for (std::size_t c = 0; c < columns.size(); ++c) {
                if (fields[c] != columns[c]) {
                    throw ParseError(file, row, c + 1, "expected column `" + columns[c] + "` (header `" + expected + "`)");
                }
            }
            header = true;
            continue;
        }
        if (fields.size() != columns.size()) {
            throw ParseError(file, row, std::min(fields.size(), columns.size()) + 1,
                             "expected " + std::to_string(columns.size()) + " fields, found " +
                                 std::to_string(fields.size()));
        }
        std::vector<double> values(columns.size());
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto f = fields[c];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), values[c]);
            if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
                throw ParseError(file, row, c + 1, "`" + std::string(f) + "` is not a number");
            }
            if (!std::isfinite(values[c])) throw ParseError(file, row, c + 1, "value is not finite");
        }
        t.rows.push_back(std::move(values));
        t.line_numbers.push_back(row);
    }
    if (!header) throw ParseError(file, 0, 0, "file is empty");
    return t;
}

}  // namespace detail

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Numeric CSV with an arbitrary header; `nan` and `inf` cells are accepted.
inline CsvTable read_csv(const std::filesystem::path& path) {
    const std::string file = path.string();
    std::ifstream in(path);
    if (!in) throw ParseError(file, 0, 0, "cannot open file");
    CsvTable t;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split(line);
        if (t.header.empty()) {
            for (auto f : fields) t.header.emplace_back(f);
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw ParseError(file, row, std::min(fields.size(), t.header.size()) + 1,
                             "expected " + std::to_string(t.header.size()) + " fields, found " +
                                 std::to_string(fields.size()));
        }
        std::vector<double> values(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto f = fields[c];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), values[c]);
            if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
                throw ParseError(file, row, c + 1, "`" + std::string(f) + "` is not a number");
            }
        }
        t.rows.push_back(std::move(values));
    }
    if (t.header.empty()) throw ParseError(file, 0, 0, "file is empty");
    return t;
}

/// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

struct PressureSeries {
    std::vector<double> times;
    std::vector<double> pressures;
};

inline PressureSeries read_pressure_csv(const std::filesystem::path& path) {
    const auto table = detail::read_table(path, {"time", "pressure"});
    PressureSeries s;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const double t = table.rows[i][0];
        const auto row = table.line_numbers[i];
        if (t < 0.0) throw ParseError(path.string(), row, 1, "time must be nonnegative");
        if (!s.times.empty()) {
            if (t == s.times.back()) throw ParseError(path.string(), row, 1, "duplicated time");
            if (t < s.times.back()) throw ParseError(path.string(), row, 1, "times must be strictly increasing");
        }
        s.times.push_back(t);
        s.pressures.push_back(table.rows[i][1]);
    }
    if (s.times.empty()) throw ParseError(path.string(), 1, 0, "no pressure observations");
    return s;
}

inline RateSchedule read_rate_csv(const std::filesystem::path& path) {
    const auto table = detail::read_table(path, {"start", "end", "rate"});
    RateSchedule s;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const auto row = table.line_numbers[i];
        if (!(r[1] > r[0])) throw ParseError(path.string(), row, 2, "interval end must exceed its start");
        if (s.breakpoints.empty()) {
            s.breakpoints.push_back(r[0]);
        } else if (r[0] < s.breakpoints.back()) {
            throw ParseError(path.string(), row, 1, "interval overlaps the previous one");
        } else if (r[0] > s.breakpoints.back()) {
            throw ParseError(path.string(), row, 1, "gap between this interval and the previous one");
        }
        s.breakpoints.push_back(r[1]);
        s.rates.push_back(r[2]);
    }
    if (s.rates.empty()) throw ParseError(path.string(), 1, 0, "no rate intervals");
    return s;
}

inline WellTestData load_data(const std::filesystem::path& pressure_file, const std::filesystem::path& rate_file,
                              double initial_pressure) {
    auto p = read_pressure_csv(pressure_file);
    WellTestData d{std::move(p.times), std::move(p.pressures), read_rate_csv(rate_file), initial_pressure};
    d.validate();
    return d;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline void write_pressure_csv(const std::filesystem::path& path, std::span<const double> times,
                               std::span<const double> pressures) {
    std::ostringstream os;
    os << "time,pressure\n";
    for (std::size_t i = 0; i < times.size(); ++i) os << format_double(times[i]) << ',' << format_double(pressures[i]) << '\n';
    write_text(path, os.str());
}

inline void write_rate_csv(const std::filesystem::path& path, const RateSchedule& s) {
    std::ostringstream os;
    os << "start,end,rate\n";
    for (std::size_t j = 0; j < s.rates.size(); ++j) {
        os << format_double(s.breakpoints[j]) << ',' << format_double(s.breakpoints[j + 1]) << ','
           << format_double(s.rates[j]) << '\n';
    }
    write_text(path, os.str());
}

}  // namespace welltest::io
