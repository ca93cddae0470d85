#include "sdecmp/core/csv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "sdecmp/core/errors.hpp"

namespace sdecmp {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size()) throw InputError("csv: row width does not match header");
  rows_.push_back(std::move(row));
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void CsvTable::write(std::ostream& out) const {
  for (std::size_t j = 0; j < header_.size(); ++j) out << (j ? "," : "") << quote(header_[j]);
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      if (const auto* d = std::get_if<double>(&row[j])) {
        out << format_double(*d);
      } else if (const auto* i = std::get_if<long long>(&row[j])) {
        out << *i;
      } else {
        out << quote(std::get<std::string>(row[j]));
      }
    }
    out << '\n';
  }
}

std::string CsvTable::str() const {
  std::ostringstream s;
  write(s);
  return s.str();
}

}  // namespace sdecmp
