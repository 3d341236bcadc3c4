#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lungaug/cli/config.hpp"
#include "lungaug/core/error.hpp"

// Plain comma-separated tables. Fields never contain commas or quotes here
// (ids are file stems), so no quoting is done; writers reject such fields.

namespace lungaug::cli {

using CsvRow = std::vector<std::string>;

inline std::string fmt_double(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Probabilities print with two decimals, matching the preset grid.
inline std::string fmt_prob(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", p);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(CsvRow header, std::uint64_t seed) : header_(std::move(header)), seed_(seed) {}

  void add(CsvRow row) {
    if (row.size() != header_.size()) throw validation_error("csv: row width does not match header");
    for (const auto& f : row)
      if (f.find_first_of(",\"\n") != std::string::npos) throw validation_error("csv: field '" + f + "' needs quoting");
    rows_.push_back(std::move(row));
  }

  std::string str() const {
    std::string out;
    auto line = [&](const CsvRow& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += r[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    out += "# lungaug " + std::string(tool_version) + " seed=" + std::to_string(seed_) + "\n";
    return out;
  }

  void write(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot write " + path.string());
    f << str();
  }

  std::size_t size() const noexcept { return rows_.size(); }

 private:
  CsvRow header_;
  std::vector<CsvRow> rows_;
  std::uint64_t seed_;
};

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw validation_error("csv: missing column '" + name + "'");
  }
  bool has_column(const std::string& name) const {
    for (const auto& h : header)
      if (h == name) return true;
    return false;
  }
};

inline CsvRow split_csv_line(const std::string& line) {
  CsvRow out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Lines starting with '#' and blank lines are skipped.
inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    auto row = split_csv_line(line);
    if (!have_header) {
      t.header = std::move(row);
      have_header = true;
      continue;
    }
    if (row.size() != t.header.size()) {
      throw validation_error(path.string() + " line " + std::to_string(line_no) + ": expected " +
                             std::to_string(t.header.size()) + " fields, got " + std::to_string(row.size()));
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw validation_error(path.string() + ": empty CSV");
  return t;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw validation_error("bad number '" + s + "' in " + what);
  }
}

inline long long parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw validation_error("bad integer '" + s + "' in " + what);
  }
}

}  // namespace lungaug::cli
