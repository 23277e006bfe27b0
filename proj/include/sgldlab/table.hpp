#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace sgldlab {

using Cell = std::variant<std::int64_t, double, std::string>;

/// Column-named rows written as CSV. Doubles print with %.17g so files
/// round-trip exactly.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  /// Lexicographic order over cells (numbers compare numerically).
  void sort_rows();
  std::size_t column_index(const std::string& name) const;
  /// Numeric view of a column; string cells throw ArgumentError.
  std::vector<double> numeric_column(const std::string& name) const;
  std::vector<std::string> text_column(const std::string& name) const;
  /// Rows whose `name` column equals `value` (text comparison of the cell).
  CsvTable filter(const std::string& name, const std::string& value) const;

  std::string to_csv() const;
  void write(const std::filesystem::path& path) const;
  static CsvTable read(const std::filesystem::path& path);
};

std::string format_cell(const Cell& c);

/// Reads a numeric CSV with a header row; returns named columns in file order.
struct NumericCsv {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // one vector per column
};
NumericCsv read_numeric_csv(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace sgldlab
