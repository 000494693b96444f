#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "plc/error.hpp"

namespace plc {

/// Published stiffness range of one variable-stiffness design.
struct DesignRecord {
    std::string name;
    double k_max;                   ///< N/mm
    double k_min;                   ///< N/mm
    std::optional<double> length;   ///< mm
    std::optional<double> radius;   ///< mm
    /// Normalized values as printed in a source table, carried through untouched.
    std::optional<double> reported_max_normalized;
    std::optional<double> reported_min_normalized;

    bool has_geometry() const { return length.has_value() && radius.has_value(); }
};

inline void validate(const DesignRecord& r) {
    if (!(r.k_min > 0.0)) throw InvariantError(r.name + ": k_min must be > 0");
    if (!(r.k_max >= r.k_min)) throw InvariantError(r.name + ": k_max must be >= k_min");
    if (r.length && !(*r.length > 0.0)) throw InvariantError(r.name + ": length must be > 0");
    if (r.radius && !(*r.radius > 0.0)) throw InvariantError(r.name + ": radius must be > 0");
}

/// k·L³/R⁴, N/mm².
inline double normalize_stiffness(double k, double length, double radius) {
    if (!(length > 0.0) || !(radius > 0.0)) throw DomainError("normalization needs length > 0 and radius > 0");
    return k * length * length * length / (radius * radius * radius * radius);
}

/// Empty when the record has no geometry.
inline std::optional<double> normalize_stiffness(double k, const std::optional<double>& length,
                                                 const std::optional<double>& radius) {
    if (!length || !radius) return std::nullopt;
    return normalize_stiffness(k, *length, *radius);
}

struct ComparisonRow {
    DesignRecord record;
    std::optional<double> max_normalized;
    std::optional<double> min_normalized;
    double ratio;  ///< k_max / k_min
};

/// One row per record, sorted by ratio descending (stable for equal ratios).
inline std::vector<ComparisonRow> build_comparison(const std::vector<DesignRecord>& records) {
    if (records.empty()) throw DomainError("comparison needs at least one design");
    std::vector<ComparisonRow> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        validate(r);
        rows.push_back({r, normalize_stiffness(r.k_max, r.length, r.radius),
                        normalize_stiffness(r.k_min, r.length, r.radius), r.k_max / r.k_min});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.ratio > b.ratio; });
    return rows;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    out.push_back(std::move(cell));
    for (auto& s : out) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return out;
}

inline std::optional<double> parse_optional_number(const std::string& cell, const std::string& column, std::size_t line) {
    if (cell.empty() || cell == "NA") return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw SchemaError(column, "line " + std::to_string(line) + ": '" + cell + "' is not a number");
    return v;
}

}  // namespace detail

/// Reads `name,k_max,k_min,length_mm,radius_mm[,reported_max_normalized,reported_min_normalized]`.
/// A header row is required; blank lines and lines starting with '#' are skipped.
inline std::vector<DesignRecord> parse_designs_csv(std::string_view text) {
    std::vector<DesignRecord> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    std::vector<std::string> columns;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
        auto cells = detail::split_csv_line(line);
        if (!header_seen) {
            columns = cells;
            const std::vector<std::string> required{"name", "k_max", "k_min", "length_mm", "radius_mm"};
            if (columns.size() < required.size() || !std::equal(required.begin(), required.end(), columns.begin()))
                throw SchemaError("header", "expected columns name,k_max,k_min,length_mm,radius_mm");
            header_seen = true;
            continue;
        }
        if (cells.size() > columns.size() || cells.size() < 5)
            throw SchemaError("row", "line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                         " cells, header has " + std::to_string(columns.size()));
        cells.resize(columns.size());
        DesignRecord r;
        r.name = cells[0];
        const auto kmax = detail::parse_optional_number(cells[1], "k_max", lineno);
        const auto kmin = detail::parse_optional_number(cells[2], "k_min", lineno);
        if (!kmax || !kmin) throw SchemaError("k_max/k_min", "line " + std::to_string(lineno) + ": stiffness is required");
        r.k_max = *kmax;
        r.k_min = *kmin;
        r.length = detail::parse_optional_number(cells[3], "length_mm", lineno);
        r.radius = detail::parse_optional_number(cells[4], "radius_mm", lineno);
        for (std::size_t c = 5; c < columns.size(); ++c) {
            if (columns[c] == "reported_max_normalized")
                r.reported_max_normalized = detail::parse_optional_number(cells[c], columns[c], lineno);
            else if (columns[c] == "reported_min_normalized")
                r.reported_min_normalized = detail::parse_optional_number(cells[c], columns[c], lineno);
        }
        validate(r);
        out.push_back(std::move(r));
    }
    if (!header_seen) throw SchemaError("header", "designs file is empty");
    return out;
}

}  // namespace plc
