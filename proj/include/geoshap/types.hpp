#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace geoshap {

// Row-major so that one row is one observation, matching the wire format and
// numpy's default layout.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Which of the p input columns jointly form the location player GEO.
//
// Effective players are the p - g non-location columns, in column order,
// followed by GEO as the last player (index q - 1).
class GeoSpec {
 public:
  GeoSpec(std::vector<std::string> feature_names, std::vector<int> geo_indices);

  // Convenience for unnamed columns: names become x0, x1, ...
  static GeoSpec unnamed(int p, std::vector<int> geo_indices);

  int p() const { return static_cast<int>(feature_names_.size()); }
  int g() const { return static_cast<int>(geo_indices_.size()); }
  int q() const { return p() - g() + 1; }
  // Number of non-location features, p - g.
  int num_features() const { return p() - g(); }

  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }
  const std::vector<int>& geo_indices() const { return geo_indices_; }
  // Column indices of the non-location features, ascending.
  const std::vector<int>& feature_indices() const { return feature_indices_; }
  // Effective player that owns each input column.
  const std::vector<int>& player_of_column() const { return player_of_column_; }

  std::vector<std::string> non_geo_names() const;
  std::vector<std::string> geo_names() const;
  int geo_player() const { return q() - 1; }

 private:
  std::vector<std::string> feature_names_;
  std::vector<int> geo_indices_;
  std::vector<int> feature_indices_;
  std::vector<int> player_of_column_;
};

// Reference sample standing in for "absent" features.
struct BackgroundData {
  Matrix rows;
  Vector row_weights;
  std::string descriptor;

  // Uniform weights over the given rows.
  static BackgroundData uniform(Matrix rows, std::string descriptor = "full");

  int size() const { return static_cast<int>(rows.rows()); }
  // Throws DataError when the invariants (m >= 1, weights sum to one,
  // non-negative weights, column count) do not hold.
  void validate(int expected_columns) const;
};

}  // namespace geoshap
