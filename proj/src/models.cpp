#include "geoshap/models.hpp"

#include <string>
#include <utility>

#include "geoshap/errors.hpp"
#include "geoshap/io.hpp"
#include "geoshap/simulation.hpp"

namespace geoshap {

OlsModel OlsModel::fit(const Matrix& x, const Vector& y) {
  const auto n = x.rows();
  const auto p = x.cols();
  if (y.size() != n) throw DataError("OLS: X and y row counts differ");
  if (n <= p) {
    throw DataError("OLS needs more rows than predictors (n=" +
                    std::to_string(n) + ", p=" + std::to_string(p) + ")");
  }
  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = x;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p + 1) {
    // Columns pivoted past the numerical rank are the collinear ones.
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = qr.rank(); i < p + 1; ++i) {
      if (!cols.empty()) cols += ", ";
      cols += perm[i] == 0 ? std::string("intercept")
                           : "x" + std::to_string(perm[i] - 1);
    }
    throw NumericalError("OLS design is rank deficient; collinear columns: " +
                         cols);
  }
  OlsModel model(qr.solve(y));
  const Vector resid = y - design * model.coefficients_;
  const double sse = resid.squaredNorm();
  const double sst = (y.array() - y.mean()).square().sum();
  model.r_squared_ = sst > 0.0 ? 1.0 - sse / sst : 1.0;
  model.residual_variance_ = sse / static_cast<double>(n - p - 1);
  return model;
}

OlsModel::OlsModel(Vector coefficients) : coefficients_(std::move(coefficients)) {
  if (coefficients_.size() < 1) throw ConfigError("OLS needs an intercept");
}

Vector OlsModel::predict(const Matrix& x) const {
  if (x.cols() != arity()) {
    throw PredictorError("OLS expects " + std::to_string(arity()) +
                         " columns, got " + std::to_string(x.cols()));
  }
  Vector out = x * coefficients_.tail(arity());
  out.array() += coefficients_[0];
  return out;
}

std::string OlsModel::descriptor() const {
  std::string out = "builtin:ols(";
  for (Eigen::Index i = 0; i < coefficients_.size(); ++i) {
    if (i) out += ',';
    out += format_double(coefficients_[i]);
  }
  return out + ")";
}

Vector TrueModel::predict(const Matrix& x) const {
  if (x.cols() != 6) {
    throw PredictorError("true model expects 6 columns (u, v, x1..x4), got " +
                         std::to_string(x.cols()));
  }
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    try {
      out[i] = simulation::dgp_components(x(i, 0), x(i, 1), x(i, 2), x(i, 3),
                                          x(i, 4), x(i, 5))
                   .sum();
    } catch (const DataError& e) {
      throw PredictorError(std::string("true model: ") + e.what());
    }
  }
  return out;
}

FunctionPredictor::FunctionPredictor(Fn fn, int arity, std::string descriptor,
                                     bool concurrency_safe)
    : fn_(std::move(fn)),
      arity_(arity),
      descriptor_(std::move(descriptor)),
      concurrency_safe_(concurrency_safe) {}

Vector FunctionPredictor::predict(const Matrix& x) const { return fn_(x); }

Vector checked_predict(const Predictor& predictor, const Matrix& x) {
  Vector y;
  try {
    y = predictor.predict(x);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw PredictorError(predictor.descriptor() + ": " + e.what());
  }
  if (y.size() != x.rows()) {
    throw PredictorError(predictor.descriptor() + " returned " +
                         std::to_string(y.size()) + " predictions for " +
                         std::to_string(x.rows()) + " rows");
  }
  return y;
}

}  // namespace geoshap
