#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "geoshap/coalition.hpp"
#include "geoshap/models.hpp"
#include "geoshap/solver.hpp"
#include "geoshap/types.hpp"

namespace geoshap {

struct ExplainOptions {
  // 0 picks the hardware concurrency.
  int workers = 1;
  std::uint64_t seed = 0;
  // Upper bound on rows per predictor call. A single coalition block
  // (background size m) is never split.
  std::size_t max_batch_rows = 65536;
  // Flag failed instances instead of aborting the batch.
  bool skip_failed = false;
};

struct ResultMetadata {
  std::vector<std::string> feature_names;
  std::vector<int> geo_indices;
  std::string background;
  std::string predictor;
  std::uint64_t seed = 0;

  std::vector<std::string> geo_names() const;
  std::vector<std::string> non_geo_names() const;
};

// Decomposition of one prediction:
//   base_value + phi_geo + sum(phi_main) + sum(phi_geo_interaction)
//     = full-coalition value.
struct InstanceExplanation {
  double base_value = 0.0;
  double phi_geo = 0.0;
  Vector phi_main;
  Vector phi_geo_interaction;
  double prediction = 0.0;
  double full_value = 0.0;
  double reconstruction_residual = 0.0;
  double wls_residual = 0.0;
};

struct GeoShapleyResult {
  double base_value = 0.0;
  Vector phi_geo;              // n
  Matrix phi_main;             // n x (p - g)
  Matrix phi_geo_interaction;  // n x (p - g)
  Vector prediction;           // n
  Vector reconstruction_residual;
  std::vector<bool> explained;
  std::vector<std::string> failures;  // empty string for explained rows
  Matrix instances;                   // n x p, raw inputs
  ResultMetadata metadata;

  int size() const { return static_cast<int>(phi_geo.size()); }
  int num_features() const { return static_cast<int>(phi_main.cols()); }
  // Column of `instances` holding non-location feature j.
  int feature_column(int j) const;
};

// Computes GeoShapley values against a fixed background. The coalition system
// and its factorization are built once and shared read-only across workers.
class Explainer {
 public:
  Explainer(const Predictor& predictor, GeoSpec spec, BackgroundData background,
            ExplainOptions options = {});

  const GeoSpec& spec() const { return spec_; }
  const BackgroundData& background() const { return background_; }
  const DesignSystem& system() const { return system_; }
  double base_value() const { return base_value_; }

  // Coalition values for every row of the design system, plus the raw
  // prediction at the instance.
  Vector coalition_values(const Vector& instance, double* prediction) const;

  InstanceExplanation explain(const Vector& instance) const;
  GeoShapleyResult explain_batch(const Matrix& x) const;

 private:
  Vector predict(const Matrix& x) const;

  const Predictor& predictor_;
  GeoSpec spec_;
  BackgroundData background_;
  ExplainOptions options_;
  DesignSystem system_;
  ConstrainedWlsSolver solver_;
  double base_value_ = 0.0;
  mutable std::mutex predict_mutex_;
};

InstanceExplanation explain_instance(const Predictor& predictor,
                                     const Vector& instance,
                                     const GeoSpec& spec,
                                     const BackgroundData& background);

GeoShapleyResult explain_batch(const Predictor& predictor, const Matrix& x,
                               const GeoSpec& spec,
                               const BackgroundData& background,
                               const ExplainOptions& options = {});

// Resolves workers = 0 to the hardware concurrency.
int resolve_workers(int workers);

}  // namespace geoshap
