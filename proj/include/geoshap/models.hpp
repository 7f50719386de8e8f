#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "geoshap/types.hpp"

namespace geoshap {

// Batch prediction function: k x p matrix in, k predictions out.
//
// Implementations must be deterministic. When concurrency_safe() is false the
// explainer serializes calls to predict().
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual Vector predict(const Matrix& x) const = 0;
  virtual int arity() const = 0;
  virtual std::string descriptor() const = 0;
  virtual bool concurrency_safe() const { return true; }
};

// Ordinary least squares, intercept first.
class OlsModel final : public Predictor {
 public:
  // Throws NumericalError naming the collinear columns when X (with the
  // intercept column) is rank deficient, DataError when n <= p.
  static OlsModel fit(const Matrix& x, const Vector& y);

  // coefficients = (intercept, slope_1, ..., slope_p).
  explicit OlsModel(Vector coefficients);

  Vector predict(const Matrix& x) const override;
  int arity() const override { return static_cast<int>(coefficients_.size()) - 1; }
  std::string descriptor() const override;

  const Vector& coefficients() const { return coefficients_; }
  double intercept() const { return coefficients_[0]; }
  double r_squared() const { return r_squared_; }
  double residual_variance() const { return residual_variance_; }

 private:
  Vector coefficients_;
  double r_squared_ = 0.0;
  double residual_variance_ = 0.0;
};

// Closed-form simulation DGP. Inputs are rows of (u, v, x1, x2, x3, x4).
class TrueModel final : public Predictor {
 public:
  Vector predict(const Matrix& x) const override;
  int arity() const override { return 6; }
  std::string descriptor() const override { return "builtin:truemodel"; }
};

// Adapts an arbitrary callable. Used by tests and the Python bindings.
class FunctionPredictor final : public Predictor {
 public:
  using Fn = std::function<Vector(const Matrix&)>;

  FunctionPredictor(Fn fn, int arity, std::string descriptor,
                    bool concurrency_safe = true);

  Vector predict(const Matrix& x) const override;
  int arity() const override { return arity_; }
  std::string descriptor() const override { return descriptor_; }
  bool concurrency_safe() const override { return concurrency_safe_; }

 private:
  Fn fn_;
  int arity_;
  std::string descriptor_;
  bool concurrency_safe_;
};

// Checks the output length contract and rethrows foreign exceptions as
// PredictorError.
Vector checked_predict(const Predictor& predictor, const Matrix& x);

}  // namespace geoshap
