#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "geoshap/background.hpp"
#include "geoshap/explainer.hpp"
#include "geoshap/simulation.hpp"

namespace geoshap::validation {

// WLS interaction divided by the brute-force GEO x feature interaction on
// bilinear games a * 1[GEO in S] * 1[j in S] (plus separable noise terms).
struct InteractionRatio {
  int q = 0;
  int games = 0;
  double constant = 0.0;
  // max |ratio - constant| / |constant| over all games at this q.
  double max_relative_spread = 0.0;
};

std::vector<InteractionRatio> interaction_ratio_study(
    const std::vector<int>& qs, std::uint64_t seed, int games_per_q = 10);

struct ValidationOptions {
  std::uint64_t seed = 42;
  double noise_sd = 1.0;
  // Number of grid cells to explain; the background is always built from
  // the full grid.
  std::optional<int> n;
  BackgroundSpec background = BackgroundSpec::full();
  int workers = 1;
  bool interaction_study = true;
};

struct ValidationReport {
  std::uint64_t seed = 0;
  double noise_sd = 1.0;
  int grid_size = 0;
  int explained = 0;
  std::string background;
  double theoretical_r2 = 0.0;
  double base_value = 0.0;
  // max |residual| / max(1, |prediction|)
  double max_relative_residual = 0.0;
  simulation::Fidelity intrinsic;
  simulation::Fidelity beta1;
  simulation::Fidelity beta2;
  // beta1 estimate scored against the beta2 surface.
  simulation::Fidelity swapped;
  double f3_slope = 0.0;
  double f4_coefficient = 0.0;
  std::vector<InteractionRatio> interaction_ratios;

  GeoShapleyResult result;
};

// Simulates the grid, explains it with the closed-form true model, and scores
// the recovered surfaces against the known components.
ValidationReport run_validation(const ValidationOptions& options);

void write_report_json(const ValidationReport& report, std::ostream& out);
void write_report_table(const ValidationReport& report, std::ostream& out);

struct VarianceRow {
  int k = 0;
  int reps = 0;
  int instances = 0;
  double mean_variance = 0.0;
};

struct BackgroundVarianceOptions {
  std::uint64_t seed = 42;
  std::vector<int> ks{5, 10, 20, 50, 100};
  int reps = 20;
  // Evaluation subsample of grid cells; all 2,500 when unset.
  std::optional<int> n;
  int workers = 1;
};

// For each k, explains the evaluation cells against `reps` independent
// random backgrounds of size k and averages the per-instance sample
// variance of phi_geo.
std::vector<VarianceRow> background_variance(
    const BackgroundVarianceOptions& options);

void write_variance_csv(const std::vector<VarianceRow>& rows, std::ostream& out);

}  // namespace geoshap::validation
