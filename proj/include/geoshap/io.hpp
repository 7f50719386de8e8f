#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "geoshap/types.hpp"

namespace geoshap {

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);
// Strict parse of a full decimal field; throws DataError on trailing junk.
double parse_double(std::string_view text);

// Numeric CSV with a mandatory header row.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;

  // Throws DataError naming the column when it is missing.
  int column_index(const std::string& name) const;
  bool has_column(const std::string& name) const;
  Vector column(const std::string& name) const;
  Matrix columns(const std::vector<std::string>& names) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

std::vector<std::string> split(std::string_view text, char sep);

}  // namespace geoshap
