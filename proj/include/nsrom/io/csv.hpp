#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nsrom/errors.hpp"
#include "nsrom/numerics/vector.hpp"

namespace nsrom {

// Header row plus rows of already formatted cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return k;
    throw FormatError("csv: no column '" + name + "'");
  }

  Vector column(const std::string& name) const {
    const std::size_t k = column_index(name);
    Vector v;
    v.reserve(rows.size());
    for (std::size_t n = 0; n < rows.size(); ++n) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(rows[n][k], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != rows[n][k].size())
        throw FormatError("csv: column '" + name + "' row " + std::to_string(n + 1) + ": not a number: '" + rows[n][k] + "'");
      v.push_back(x);
    }
    return v;
  }

  void add_row(std::vector<std::string> row) {
    NSROM_REQUIRE(row.size() == header.size(), "CsvTable: row width differs from header");
    rows.push_back(std::move(row));
  }
};

// 17 significant digits round-trips every double.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline CsvTable make_table(std::vector<std::string> header, const std::vector<Vector>& columns) {
  NSROM_REQUIRE(header.size() == columns.size(), "make_table: header and column counts differ");
  CsvTable t{std::move(header), {}};
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  for (const Vector& c : columns) NSROM_REQUIRE(c.size() == n, "make_table: ragged columns");
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> row;
    for (const Vector& c : columns) row.push_back(format_real(c[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_csv(const std::string& path, const CsvTable& t) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  const auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << '\n';
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("csv file not found: " + path);
  const auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("csv: " + path + " is empty");
  t.header = split(line);
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw FormatError("csv: " + path + " line " + std::to_string(n) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace nsrom
