#include "geoshap/explainer.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <utility>

#include "geoshap/errors.hpp"
#include "parallel.hpp"

namespace geoshap {
namespace {

DesignSystem build_system(const GeoSpec& spec) {
  return build_design_matrix(enumerate_coalitions(spec.q()), spec);
}

}  // namespace

std::vector<std::string> ResultMetadata::geo_names() const {
  std::vector<std::string> out;
  for (int c : geo_indices) out.push_back(feature_names.at(c));
  return out;
}

std::vector<std::string> ResultMetadata::non_geo_names() const {
  return GeoSpec(feature_names, geo_indices).non_geo_names();
}

int GeoShapleyResult::feature_column(int j) const {
  return GeoSpec(metadata.feature_names, metadata.geo_indices)
      .feature_indices()
      .at(j);
}

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

Explainer::Explainer(const Predictor& predictor, GeoSpec spec,
                     BackgroundData background, ExplainOptions options)
    : predictor_(predictor),
      spec_(std::move(spec)),
      background_(std::move(background)),
      options_(options),
      system_(build_system(spec_)),
      solver_(system_) {
  if (predictor_.arity() != spec_.p()) {
    throw ConfigError("predictor " + predictor_.descriptor() + " takes " +
                      std::to_string(predictor_.arity()) +
                      " features but the data has " + std::to_string(spec_.p()));
  }
  background_.validate(spec_.p());
  try {
    base_value_ = predict(background_.rows).dot(background_.row_weights);
  } catch (const PredictorError& e) {
    throw PredictorError(std::string("empty coalition: ") + e.what());
  }
}

Vector Explainer::predict(const Matrix& x) const {
  if (predictor_.concurrency_safe()) return checked_predict(predictor_, x);
  std::lock_guard<std::mutex> lock(predict_mutex_);
  return checked_predict(predictor_, x);
}

Vector Explainer::coalition_values(const Vector& instance,
                                   double* prediction) const {
  if (instance.size() != spec_.p()) {
    throw DataError("instance has " + std::to_string(instance.size()) +
                    " values, expected " + std::to_string(spec_.p()));
  }
  if (!instance.allFinite()) throw DataError("instance contains non-finite values");

  const auto m = static_cast<std::size_t>(background_.size());
  const auto& coalitions = system_.coalitions;
  const std::size_t total = coalitions.size();
  Vector values(static_cast<Eigen::Index>(total));
  values[0] = base_value_;

  const std::size_t per_call =
      std::max<std::size_t>(1, options_.max_batch_rows / std::max<std::size_t>(m, 1));
  // Row 0 of the first batch holds the raw instance.
  std::size_t next = 1;
  bool first = true;
  Matrix batch;
  while (next < total) {
    const std::size_t count = std::min(per_call, total - next);
    const std::size_t offset = first ? 1 : 0;
    batch.resize(static_cast<Eigen::Index>(offset + count * m), spec_.p());
    if (first) batch.row(0) = instance.transpose();
    for (std::size_t c = 0; c < count; ++c) {
      write_masked_block(
          instance, coalitions[next + c], spec_, background_,
          batch.middleRows(static_cast<Eigen::Index>(offset + c * m),
                           static_cast<Eigen::Index>(m)));
    }
    Vector y;
    try {
      y = predict(batch);
    } catch (const PredictorError& e) {
      throw PredictorError("coalitions " + std::to_string(next) + ".." +
                           std::to_string(next + count - 1) + ": " + e.what());
    }
    if (first && prediction != nullptr) *prediction = y[0];
    for (std::size_t c = 0; c < count; ++c) {
      values[static_cast<Eigen::Index>(next + c)] =
          y.segment(static_cast<Eigen::Index>(offset + c * m),
                    static_cast<Eigen::Index>(m))
              .dot(background_.row_weights);
    }
    next += count;
    first = false;
  }
  return values;
}

InstanceExplanation Explainer::explain(const Vector& instance) const {
  InstanceExplanation out;
  const Vector values = coalition_values(instance, &out.prediction);
  const WlsSolution sol = solver_.solve(values);
  const int k = system_.num_features();
  out.base_value = sol.phi[system_.intercept_column()];
  out.phi_geo = sol.phi[system_.geo_column()];
  out.phi_main = sol.phi.head(k);
  out.phi_geo_interaction = sol.phi.segment(k, k);
  out.full_value = values[values.size() - 1];
  out.reconstruction_residual = out.base_value + out.phi_geo +
                                out.phi_main.sum() +
                                out.phi_geo_interaction.sum() - out.full_value;
  out.wls_residual = sol.residual_norm;
  return out;
}

GeoShapleyResult Explainer::explain_batch(const Matrix& x) const {
  const auto n = x.rows();
  if (n < 1) throw DataError("no instances to explain");
  if (x.cols() != spec_.p()) {
    throw DataError("input has " + std::to_string(x.cols()) +
                    " columns, expected " + std::to_string(spec_.p()));
  }
  const int k = spec_.num_features();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  GeoShapleyResult result;
  result.base_value = base_value_;
  result.phi_geo = Vector::Constant(n, nan);
  result.phi_main = Matrix::Constant(n, k, nan);
  result.phi_geo_interaction = Matrix::Constant(n, k, nan);
  result.prediction = Vector::Constant(n, nan);
  result.reconstruction_residual = Vector::Constant(n, nan);
  result.explained.assign(static_cast<std::size_t>(n), false);
  result.failures.assign(static_cast<std::size_t>(n), std::string());
  result.instances = x;
  result.metadata = ResultMetadata{spec_.feature_names(), spec_.geo_indices(),
                                   background_.descriptor,
                                   predictor_.descriptor(), options_.seed};

  const auto failures = detail::parallel_for(
      static_cast<std::size_t>(n), resolve_workers(options_.workers),
      [&](std::size_t i) {
        const auto row = static_cast<Eigen::Index>(i);
        const InstanceExplanation e = explain(x.row(row).transpose());
        result.phi_geo[row] = e.phi_geo;
        result.phi_main.row(row) = e.phi_main.transpose();
        result.phi_geo_interaction.row(row) = e.phi_geo_interaction.transpose();
        result.prediction[row] = e.prediction;
        result.reconstruction_residual[row] = e.reconstruction_residual;
      },
      !options_.skip_failed);

  for (std::size_t i = 0; i < failures.size(); ++i) {
    result.explained[i] = !failures[i].failed;
    if (!failures[i].failed) continue;
    const std::string msg = "instance " + std::to_string(i) + ": " +
                            failures[i].message;
    if (!options_.skip_failed) detail::throw_as(failures[i].category, msg);
    result.failures[i] = msg;
  }
  return result;
}

InstanceExplanation explain_instance(const Predictor& predictor,
                                     const Vector& instance,
                                     const GeoSpec& spec,
                                     const BackgroundData& background) {
  return Explainer(predictor, spec, background).explain(instance);
}

GeoShapleyResult explain_batch(const Predictor& predictor, const Matrix& x,
                               const GeoSpec& spec,
                               const BackgroundData& background,
                               const ExplainOptions& options) {
  return Explainer(predictor, spec, background, options).explain_batch(x);
}

}  // namespace geoshap
