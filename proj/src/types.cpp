#include "geoshap/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "geoshap/errors.hpp"

namespace geoshap {

GeoSpec::GeoSpec(std::vector<std::string> feature_names,
                 std::vector<int> geo_indices)
    : feature_names_(std::move(feature_names)),
      geo_indices_(std::move(geo_indices)) {
  const int cols = p();
  if (geo_indices_.empty()) {
    throw ConfigError("at least one location column is required");
  }
  std::set<int> seen;
  for (int idx : geo_indices_) {
    if (idx < 0 || idx >= cols) {
      throw ConfigError("location column index " + std::to_string(idx) +
                        " out of range for " + std::to_string(cols) +
                        " columns");
    }
    if (!seen.insert(idx).second) {
      throw ConfigError("duplicate location column index " +
                        std::to_string(idx));
    }
  }
  if (q() < 2) {
    throw ConfigError("at least one non-location feature is required");
  }
  player_of_column_.assign(cols, q() - 1);
  int player = 0;
  for (int c = 0; c < cols; ++c) {
    if (!seen.contains(c)) {
      feature_indices_.push_back(c);
      player_of_column_[c] = player++;
    }
  }
}

GeoSpec GeoSpec::unnamed(int p, std::vector<int> geo_indices) {
  std::vector<std::string> names;
  names.reserve(p);
  for (int i = 0; i < p; ++i) names.push_back("x" + std::to_string(i));
  return GeoSpec(std::move(names), std::move(geo_indices));
}

std::vector<std::string> GeoSpec::non_geo_names() const {
  std::vector<std::string> out;
  for (int c : feature_indices_) out.push_back(feature_names_[c]);
  return out;
}

std::vector<std::string> GeoSpec::geo_names() const {
  std::vector<std::string> out;
  for (int c : geo_indices_) out.push_back(feature_names_[c]);
  return out;
}

BackgroundData BackgroundData::uniform(Matrix rows, std::string descriptor) {
  BackgroundData bg;
  const auto m = rows.rows();
  bg.rows = std::move(rows);
  bg.row_weights = Vector::Constant(m, m > 0 ? 1.0 / static_cast<double>(m) : 0.0);
  bg.descriptor = std::move(descriptor);
  return bg;
}

void BackgroundData::validate(int expected_columns) const {
  if (rows.rows() < 1) throw DataError("background must have at least one row");
  if (rows.cols() != expected_columns) {
    throw DataError("background has " + std::to_string(rows.cols()) +
                    " columns, expected " + std::to_string(expected_columns));
  }
  if (row_weights.size() != rows.rows()) {
    throw DataError("background weight count does not match row count");
  }
  if ((row_weights.array() < 0.0).any()) {
    throw DataError("background weights must be non-negative");
  }
  if (std::abs(row_weights.sum() - 1.0) > 1e-12) {
    throw DataError("background weights must sum to 1");
  }
}

}  // namespace geoshap
