#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoshap/background.hpp"
#include "geoshap/explainer.hpp"
#include "geoshap/types.hpp"

namespace geoshap {

// GWR-style local coefficients recovered from (phi_j + phi_geo_j) divided by
// the centred feature value. Cells where the denominator is too small are
// flagged undefined and hold NaN.
struct SvcSurface {
  int feature = 0;
  Vector beta_hat;
  std::vector<bool> defined_mask;

  int defined_count() const;
};

// `x` holds the explained instances (n x p); j indexes non-location
// features. The centring mean is the background-weighted mean of the
// feature; entries with |x_ij - mean| < rel_tol * std(X_j) are undefined.
SvcSurface svc_recover(const GeoShapleyResult& result, const Matrix& x, int j,
                       const GeoSpec& spec, const BackgroundData& background,
                       double rel_tol = 0.1);

// phi_0 + phi_geo per instance.
Vector intrinsic_effect(const GeoShapleyResult& result);

// Percentage change for a contribution on a log10 target: (10^phi - 1) * 100.
double log10_to_percent(double phi);

struct RankedFeature {
  std::string label;
  double mean_abs_value = 0.0;
};

// Labels: "GEO", each feature name, and "<name> x GEO" for interactions.
// Sorted by descending mean |phi|; ties keep the order GEO, mains,
// interactions.
std::vector<RankedFeature> rank_features(const GeoShapleyResult& result);

std::string interaction_label(const std::string& feature);

// Type-7 sample quantile (linear interpolation between order statistics).
double percentile_type7(std::vector<double> values, double prob);

enum class Trainer { kOls };

// "builtin:ols" is the only refittable model. Anything else, in particular
// a bridge command, raises ConfigError.
Trainer parse_trainer(const std::string& text);

struct BootstrapOptions {
  int replicates = 100;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct BootstrapResult {
  int replicates = 0;
  double alpha = 0.05;
  std::vector<std::uint64_t> replicate_seeds;
  Vector phi_geo_lo, phi_geo_hi;
  Matrix phi_main_lo, phi_main_hi;
  Matrix phi_geo_interaction_lo, phi_geo_interaction_hi;
};

// Resamples the training rows with replacement, refits, and re-explains the
// fixed evaluation instances against a fixed background. The background is
// selected once from the original training data.
BootstrapResult bootstrap_ci(const Matrix& x_train, const Vector& y_train,
                             const Matrix& x_eval, Trainer trainer,
                             const GeoSpec& spec,
                             const BackgroundSpec& background_spec,
                             const BootstrapOptions& options = {});

// True where the interval excludes zero (lower > 0 or upper < 0). An
// interval touching zero is not significant. Throws DataError when the
// interval shape differs from the point estimates.
std::vector<bool> significance_mask(const Vector& point, const Vector& lower,
                                    const Vector& upper);

}  // namespace geoshap
