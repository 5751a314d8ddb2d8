#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnids/data/table.hpp"

namespace hetnids {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

// Numeric parse for a feature cell. Anything unparsable, empty, or
// non-finite (inf/nan tokens included) becomes a missing marker.
inline double parse_feature_cell(const std::string& raw) {
  const std::string cell = trim(strip_quotes(trim(raw)));
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') return std::numeric_limits<double>::quiet_NaN();
  if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
  return v;
}

inline bool iequals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

}  // namespace detail

// Reads a flow CSV with a header row. Feature columns are parsed
// numerically (missing marked NaN); the named label column is kept as
// text. Row arity mismatches are reported with the file line number.
inline RawTable load_flow_csv(const std::string& path, const std::string& label_column = kDefaultLabelColumn) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  RawTable table;
  for (const std::string& cell : detail::split_csv_line(line)) {
    table.column_names.push_back(detail::trim(detail::strip_quotes(detail::trim(cell))));
  }

  bool found = false;
  for (std::size_t i = 0; i < table.column_names.size(); ++i) {
    if (table.column_names[i] == label_column) {
      table.label_col = i;
      found = true;
      break;
    }
  }
  if (!found) throw std::runtime_error("label column '" + label_column + "' not found in " + path);

  const std::size_t ncols = table.column_names.size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != ncols) {
      throw std::runtime_error("csv parse error at line " + std::to_string(line_no) + " of " + path +
                               ": expected " + std::to_string(ncols) + " cells, got " +
                               std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(ncols - 1);
    for (std::size_t i = 0; i < ncols; ++i) {
      if (i == table.label_col) continue;
      row.push_back(detail::parse_feature_cell(cells[i]));
    }
    table.features.push_back(std::move(row));
    table.labels.push_back(detail::trim(detail::strip_quotes(detail::trim(cells[table.label_col]))));
  }
  return table;
}

}  // namespace hetnids
