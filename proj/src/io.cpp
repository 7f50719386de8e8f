#include "geoshap/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <system_error>

#include "geoshap/errors.hpp"

namespace geoshap {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      text.empty()) {
    throw DataError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      return out;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

int CsvTable::column_index(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("column not found: " + name);
  return static_cast<int>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

Vector CsvTable::column(const std::string& name) const {
  return values.col(column_index(name));
}

Matrix CsvTable::columns(const std::vector<std::string>& names) const {
  Matrix out(values.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = values.col(column_index(names[j]));
  }
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV input is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  for (auto& name : split(line, ',')) {
    const auto first = name.find_first_not_of(" \t\"");
    const auto last = name.find_last_not_of(" \t\"");
    table.header.push_back(first == std::string::npos
                               ? std::string()
                               : name.substr(first, last - first + 1));
  }
  const auto cols = table.header.size();

  std::vector<double> flat;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split(line, ',');
    if (fields.size() != cols) {
      throw DataError("line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      try {
        flat.push_back(parse_double(fields[c]));
      } catch (const DataError& e) {
        throw DataError("line " + std::to_string(line_no) + ", column " +
                        table.header[c] + ": " + e.what());
      }
    }
    ++rows;
  }
  table.values = Eigen::Map<Matrix>(flat.data(), static_cast<Eigen::Index>(rows),
                                    static_cast<Eigen::Index>(cols));
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_csv(in);
}

}  // namespace geoshap
