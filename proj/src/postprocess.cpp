#include "geoshap/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "geoshap/errors.hpp"
#include "geoshap/models.hpp"
#include "parallel.hpp"

namespace geoshap {
using detail::splitmix64;

int SvcSurface::defined_count() const {
  return static_cast<int>(
      std::count(defined_mask.begin(), defined_mask.end(), true));
}

SvcSurface svc_recover(const GeoShapleyResult& result, const Matrix& x, int j,
                       const GeoSpec& spec, const BackgroundData& background,
                       double rel_tol) {
  const int k = spec.num_features();
  if (j < 0 || j >= k) {
    throw ConfigError("feature index " + std::to_string(j) +
                      " is not a non-location feature");
  }
  if (x.rows() != result.size() || x.cols() != spec.p()) {
    throw DataError("instance matrix does not match the result shape");
  }
  background.validate(spec.p());
  const int col = spec.feature_indices()[j];
  const Vector xj = x.col(col);
  const double mean = xj.mean();
  const double sd = std::sqrt((xj.array() - mean).square().sum() /
                              static_cast<double>(std::max<Eigen::Index>(1, xj.size() - 1)));
  if (!(sd > 0.0)) {
    throw NumericalError("feature " + spec.feature_names()[col] +
                         " has zero variance");
  }
  const double centre = background.rows.col(col).dot(background.row_weights);
  const double cutoff = rel_tol * sd;

  SvcSurface out;
  out.feature = j;
  out.beta_hat = Vector::Constant(xj.size(), std::numeric_limits<double>::quiet_NaN());
  out.defined_mask.assign(static_cast<std::size_t>(xj.size()), false);
  for (Eigen::Index i = 0; i < xj.size(); ++i) {
    const double denom = xj[i] - centre;
    if (std::abs(denom) < cutoff) continue;
    const double num = result.phi_main(i, j) + result.phi_geo_interaction(i, j);
    if (!std::isfinite(num)) continue;
    out.beta_hat[i] = num / denom;
    out.defined_mask[i] = true;
  }
  return out;
}

Vector intrinsic_effect(const GeoShapleyResult& result) {
  return result.phi_geo.array() + result.base_value;
}

double log10_to_percent(double phi) { return (std::pow(10.0, phi) - 1.0) * 100.0; }

std::string interaction_label(const std::string& feature) {
  return feature + " x GEO";
}

std::vector<RankedFeature> rank_features(const GeoShapleyResult& result) {
  const auto names = result.metadata.non_geo_names();
  auto mean_abs = [](const auto& v) {
    double total = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::isnan(v[i])) continue;
      total += std::abs(v[i]);
      ++count;
    }
    return count ? total / static_cast<double>(count) : 0.0;
  };
  std::vector<RankedFeature> out;
  out.push_back({"GEO", mean_abs(result.phi_geo)});
  for (int j = 0; j < result.num_features(); ++j) {
    out.push_back({names[j], mean_abs(result.phi_main.col(j))});
  }
  for (int j = 0; j < result.num_features(); ++j) {
    out.push_back({interaction_label(names[j]),
                   mean_abs(result.phi_geo_interaction.col(j))});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedFeature& a, const RankedFeature& b) {
                     return a.mean_abs_value > b.mean_abs_value;
                   });
  return out;
}

double percentile_type7(std::vector<double> values, double prob) {
  if (values.empty()) throw DataError("percentile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError("percentile outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Trainer parse_trainer(const std::string& text) {
  if (text == "builtin:ols") return Trainer::kOls;
  throw ConfigError("bootstrap requires a refittable built-in trainer "
                    "(builtin:ols); '" + text +
                    "' cannot be refit on resampled data");
}

BootstrapResult bootstrap_ci(const Matrix& x_train, const Vector& y_train,
                             const Matrix& x_eval, Trainer trainer,
                             const GeoSpec& spec,
                             const BackgroundSpec& background_spec,
                             const BootstrapOptions& options) {
  if (options.replicates < 20) {
    throw ConfigError("bootstrap needs at least 20 replicates");
  }
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw ConfigError("alpha must be in (0, 1)");
  }
  if (x_train.rows() != y_train.size()) {
    throw DataError("training X and y row counts differ");
  }
  const BackgroundData background = select_background(x_train, background_spec);
  const auto n_train = x_train.rows();
  const auto n = x_eval.rows();
  const int k = spec.num_features();
  const int reps = options.replicates;

  BootstrapResult out;
  out.replicates = reps;
  out.alpha = options.alpha;
  for (int b = 0; b < reps; ++b) {
    out.replicate_seeds.push_back(
        splitmix64(options.seed ^ splitmix64(static_cast<std::uint64_t>(b))));
  }

  std::vector<GeoShapleyResult> replicate(static_cast<std::size_t>(reps));
  const auto failures = detail::parallel_for(
      static_cast<std::size_t>(reps), resolve_workers(options.workers),
      [&](std::size_t b) {
        std::mt19937_64 gen(out.replicate_seeds[b]);
        std::uniform_int_distribution<Eigen::Index> pick(0, n_train - 1);
        Matrix xb(n_train, x_train.cols());
        Vector yb(n_train);
        for (Eigen::Index i = 0; i < n_train; ++i) {
          const auto r = pick(gen);
          xb.row(i) = x_train.row(r);
          yb[i] = y_train[r];
        }
        switch (trainer) {
          case Trainer::kOls: {
            const OlsModel model = OlsModel::fit(xb, yb);
            replicate[b] = explain_batch(model, x_eval, spec, background);
            break;
          }
        }
      },
      true);
  for (std::size_t b = 0; b < failures.size(); ++b) {
    if (failures[b].failed) {
      detail::throw_as(failures[b].category, "bootstrap replicate " +
                                                 std::to_string(b) + ": " +
                                                 failures[b].message);
    }
  }

  const double plo = options.alpha / 2.0;
  const double phi = 1.0 - options.alpha / 2.0;
  std::vector<double> draws(static_cast<std::size_t>(reps));
  auto bounds = [&](auto&& get, double& lo, double& hi) {
    for (int b = 0; b < reps; ++b) draws[b] = get(replicate[b]);
    lo = percentile_type7(draws, plo);
    hi = percentile_type7(draws, phi);
  };

  out.phi_geo_lo.resize(n);
  out.phi_geo_hi.resize(n);
  out.phi_main_lo.resize(n, k);
  out.phi_main_hi.resize(n, k);
  out.phi_geo_interaction_lo.resize(n, k);
  out.phi_geo_interaction_hi.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    bounds([&](const GeoShapleyResult& r) { return r.phi_geo[i]; },
           out.phi_geo_lo[i], out.phi_geo_hi[i]);
    for (int j = 0; j < k; ++j) {
      bounds([&](const GeoShapleyResult& r) { return r.phi_main(i, j); },
             out.phi_main_lo(i, j), out.phi_main_hi(i, j));
      bounds([&](const GeoShapleyResult& r) {
               return r.phi_geo_interaction(i, j);
             },
             out.phi_geo_interaction_lo(i, j), out.phi_geo_interaction_hi(i, j));
    }
  }
  return out;
}

std::vector<bool> significance_mask(const Vector& point, const Vector& lower,
                                    const Vector& upper) {
  if (lower.size() != point.size() || upper.size() != point.size()) {
    throw DataError("confidence interval shape does not match the estimates");
  }
  std::vector<bool> out(static_cast<std::size_t>(point.size()));
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    out[i] = lower[i] > 0.0 || upper[i] < 0.0;
  }
  return out;
}

}  // namespace geoshap
