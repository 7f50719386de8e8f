#pragma once

#include <vector>

#include "geoshap/coalition.hpp"
#include "geoshap/types.hpp"

namespace geoshap {

// Coefficients in the design-matrix column order:
//   [mains | GEO x feature interactions | GEO | intercept]
// (interactions absent in classic mode).
struct WlsSolution {
  Vector phi;
  // Weighted residual norm of the reduced (finite-weight) system.
  double residual_norm = 0.0;
  // Ratio of the extreme diagonal magnitudes of the reduced R factor.
  double condition_hint = 1.0;
};

// Weighted least squares over the finite-weight coalitions subject to the two
// exact constraints carried by the infinite-weight rows:
//   intercept = v(empty)            (fixed directly)
//   Z(full) . phi = v(full)         (GEO coefficient eliminated)
//
// The reduced system depends only on Z and the weights, so its QR
// factorization is computed once and reused for every value vector.
class ConstrainedWlsSolver {
 public:
  // Throws NumericalError listing the deficient columns when the reduced
  // system is rank deficient.
  explicit ConstrainedWlsSolver(const DesignSystem& system);

  WlsSolution solve(const Vector& values) const;

  int num_columns() const { return num_columns_; }

 private:
  int num_columns_ = 0;
  int geo_column_ = 0;
  int intercept_column_ = 0;
  Eigen::Index empty_row_ = -1;
  Eigen::Index full_row_ = -1;
  std::vector<int> free_columns_;
  std::vector<Eigen::Index> finite_rows_;
  Vector sqrt_weights_;
  // (geo, intercept) entries of each finite row.
  Eigen::MatrixXd geo_on_finite_;
  Eigen::RowVectorXd full_row_free_;
  double full_row_intercept_ = 1.0;
  Eigen::MatrixXd reduced_;
  double condition_hint_ = 1.0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

// One-shot solve using system.values.
WlsSolution solve_constrained_wls(const DesignSystem& system);

}  // namespace geoshap
