#include "sgldlab/table.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sgldlab/errors.hpp"

namespace sgldlab {

std::string format_cell(const Cell& c) {
  char buf[64];
  if (const auto* i = std::get_if<std::int64_t>(&c)) {
    std::snprintf(buf, sizeof buf, "%" PRId64, *i);
    return buf;
  }
  if (const auto* d = std::get_if<double>(&c)) {
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  return std::get<std::string>(c);
}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw ArgumentError("CsvTable: row has " + std::to_string(row.size()) +
                        " cells, expected " + std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

namespace {

bool cell_less(const Cell& a, const Cell& b) {
  auto numeric = [](const Cell& c, double& out) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) {
      out = static_cast<double>(*i);
      return true;
    }
    if (const auto* d = std::get_if<double>(&c)) {
      out = *d;
      return true;
    }
    return false;
  };
  double x, y;
  const bool nx = numeric(a, x), ny = numeric(b, y);
  if (nx && ny) return x < y;
  if (nx != ny) return nx;
  return std::get<std::string>(a) < std::get<std::string>(b);
}

}  // namespace

void CsvTable::sort_rows() {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const std::vector<Cell>& a, const std::vector<Cell>& b) {
                     return std::lexicographical_compare(a.begin(), a.end(),
                                                         b.begin(), b.end(),
                                                         cell_less);
                   });
}

std::size_t CsvTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ArgumentError("CsvTable: no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t j = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (const auto* i = std::get_if<std::int64_t>(&r[j]))
      out.push_back(static_cast<double>(*i));
    else if (const auto* d = std::get_if<double>(&r[j]))
      out.push_back(*d);
    else
      out.push_back(std::stod(std::get<std::string>(r[j])));
  }
  return out;
}

std::vector<std::string> CsvTable::text_column(const std::string& name) const {
  const std::size_t j = column_index(name);
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(format_cell(r[j]));
  return out;
}

CsvTable CsvTable::filter(const std::string& name, const std::string& value) const {
  const std::size_t j = column_index(name);
  CsvTable out;
  out.columns = columns;
  for (const auto& r : rows)
    if (format_cell(r[j]) == value) out.rows.push_back(r);
  return out;
}

std::string CsvTable::to_csv() const {
  std::string s;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) s += ',';
    s += columns[j];
  }
  s += '\n';
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) s += ',';
      s += format_cell(r[j]);
    }
    s += '\n';
  }
  return s;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot open " + path.string() + " for writing");
  f << to_csv();
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ArgumentError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(f, line)) throw ArgumentError(path.string() + ": empty file");
  t.columns = split_line(line);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<Cell> row;
    for (auto& c : split_line(line)) row.emplace_back(c);
    if (row.size() != t.columns.size())
      throw ArgumentError(path.string() + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

NumericCsv read_numeric_csv(const std::filesystem::path& path) {
  const CsvTable t = CsvTable::read(path);
  NumericCsv out;
  out.columns = t.columns;
  out.data.resize(t.columns.size());
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    try {
      out.data[j] = t.numeric_column(t.columns[j]);
    } catch (const std::exception&) {
      throw ArgumentError(path.string() + ": non-numeric value in column '" +
                          t.columns[j] + "'");
    }
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace sgldlab
