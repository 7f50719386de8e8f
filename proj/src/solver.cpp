#include "geoshap/solver.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <string>

#include "geoshap/errors.hpp"

namespace geoshap {

ConstrainedWlsSolver::ConstrainedWlsSolver(const DesignSystem& system)
    : num_columns_(system.num_columns()),
      geo_column_(system.geo_column()),
      intercept_column_(system.intercept_column()) {
  const Matrix& z = system.z;
  const auto rows = z.rows();
  if (static_cast<std::size_t>(rows) != system.weights.size()) {
    throw ConfigError("design matrix and weight vector lengths differ");
  }

  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!system.weights[r].infinite) {
      finite_rows_.push_back(r);
      continue;
    }
    // Constrained rows: the empty row carries only the intercept, the full
    // row carries the geo column.
    const bool only_intercept =
        z(r, intercept_column_) != 0.0 &&
        z.row(r).cwiseAbs().sum() == std::abs(z(r, intercept_column_));
    if (only_intercept) {
      empty_row_ = r;
    } else if (z(r, geo_column_) != 0.0) {
      full_row_ = r;
    } else {
      throw ConfigError("infinite-weight row " + std::to_string(r) +
                        " is neither the empty nor the full coalition");
    }
  }
  if (empty_row_ < 0 || full_row_ < 0) {
    throw ConfigError("design system lacks the empty or full coalition row");
  }
  if (z(full_row_, geo_column_) != 1.0) {
    throw ConfigError("full coalition row must have a unit geo entry");
  }

  for (int c = 0; c < num_columns_; ++c) {
    if (c != geo_column_ && c != intercept_column_) free_columns_.push_back(c);
  }
  const auto nfree = static_cast<Eigen::Index>(free_columns_.size());
  const auto nfin = static_cast<Eigen::Index>(finite_rows_.size());
  if (nfin < nfree) {
    throw NumericalError("reduced system has " + std::to_string(nfin) +
                         " rows for " + std::to_string(nfree) + " unknowns");
  }

  full_row_free_.resize(nfree);
  for (Eigen::Index c = 0; c < nfree; ++c) {
    full_row_free_[c] = z(full_row_, free_columns_[c]);
  }
  full_row_intercept_ = z(full_row_, intercept_column_);

  sqrt_weights_.resize(nfin);
  geo_on_finite_.resize(nfin, 2);
  Eigen::MatrixXd reduced(nfin, nfree);
  for (Eigen::Index i = 0; i < nfin; ++i) {
    const auto r = finite_rows_[i];
    const double zg = z(r, geo_column_);
    sqrt_weights_[i] = std::sqrt(system.weights[r].value);
    geo_on_finite_(i, 0) = zg;
    geo_on_finite_(i, 1) = z(r, intercept_column_);
    for (Eigen::Index c = 0; c < nfree; ++c) {
      reduced(i, c) =
          sqrt_weights_[i] * (z(r, free_columns_[c]) - zg * full_row_free_[c]);
    }
  }

  qr_.compute(reduced);
  reduced_ = std::move(reduced);
  const Vector diag = qr_.matrixR().diagonal().cwiseAbs();
  const double dmin = nfree > 0 ? diag.minCoeff() : 1.0;
  condition_hint_ = nfree == 0 ? 1.0
                    : dmin > 0.0 ? diag.maxCoeff() / dmin
                                 : std::numeric_limits<double>::infinity();
  if (qr_.rank() < nfree) {
    std::string cols;
    const auto& perm = qr_.colsPermutation().indices();
    for (Eigen::Index i = qr_.rank(); i < nfree; ++i) {
      if (!cols.empty()) cols += ", ";
      cols += std::to_string(free_columns_[perm[i]]);
    }
    throw NumericalError("constrained WLS system is rank deficient; "
                         "deficient design columns: " + cols);
  }
}

WlsSolution ConstrainedWlsSolver::solve(const Vector& values) const {
  const auto nfin = static_cast<Eigen::Index>(finite_rows_.size());
  if (values.size() != static_cast<Eigen::Index>(finite_rows_.size()) + 2) {
    throw ConfigError("value vector length does not match the design matrix");
  }
  const double v_empty = values[empty_row_];
  const double v_full = values[full_row_];
  const double geo_target = v_full - full_row_intercept_ * v_empty;

  Vector rhs(nfin);
  for (Eigen::Index i = 0; i < nfin; ++i) {
    const auto r = finite_rows_[i];
    rhs[i] = sqrt_weights_[i] * (values[r] - geo_on_finite_(i, 1) * v_empty -
                                 geo_on_finite_(i, 0) * geo_target);
  }
  const Vector free = qr_.solve(rhs);

  WlsSolution out;
  out.phi = Vector::Zero(num_columns_);
  for (std::size_t c = 0; c < free_columns_.size(); ++c) {
    out.phi[free_columns_[c]] = free[static_cast<Eigen::Index>(c)];
  }
  out.phi[intercept_column_] = v_empty;
  out.phi[geo_column_] = geo_target - full_row_free_.dot(free);
  out.residual_norm = (reduced_ * free - rhs).norm();
  out.condition_hint = condition_hint_;
  return out;
}

WlsSolution solve_constrained_wls(const DesignSystem& system) {
  if (system.values.size() != system.z.rows()) {
    throw ConfigError("coalition values are not populated for every row");
  }
  return ConstrainedWlsSolver(system).solve(system.values);
}

}  // namespace geoshap
