#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace sdecmp {

/// Shortest round-trip-safe text for a double ("%.17g"); "nan"/"inf" spelled out.
std::string format_double(double v);

/// CSV table with a fixed header; cells are numbers or strings.
class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<Cell> row);
  std::size_t n_rows() const { return rows_.size(); }
  void write(std::ostream& out) const;
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace sdecmp
