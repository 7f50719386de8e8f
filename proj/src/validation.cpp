#include "geoshap/validation.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "geoshap/coalition.hpp"
#include "geoshap/errors.hpp"
#include "geoshap/io.hpp"
#include "geoshap/models.hpp"
#include "geoshap/oracle.hpp"
#include "geoshap/postprocess.hpp"
#include "geoshap/solver.hpp"
#include "parallel.hpp"

namespace geoshap::validation {
namespace {

using nlohmann::json;

GeoSpec simulation_spec() {
  return GeoSpec({"u", "v", "X1", "X2", "X3", "X4"}, {0, 1});
}

// Slope of the simple least-squares line of y on x.
double fitted_slope(const Vector& x, const Vector& y) {
  const Vector xc = x.array() - x.mean();
  const double sxx = xc.squaredNorm();
  if (!(sxx > 0.0)) throw NumericalError("slope fit on a constant regressor");
  return xc.dot(y.array().matrix() - Vector::Constant(y.size(), y.mean())) / sxx;
}

Vector centred(const Vector& v) { return v.array() - v.mean(); }

json fidelity_json(const simulation::Fidelity& f) {
  return {{"r2", f.r2}, {"rmse", f.rmse}, {"count", f.count}};
}

}  // namespace

std::vector<InteractionRatio> interaction_ratio_study(const std::vector<int>& qs,
                                                      std::uint64_t seed,
                                                      int games_per_q) {
  if (games_per_q < 2) throw ConfigError("interaction study needs two or more games");
  std::vector<InteractionRatio> out;
  for (int q : qs) {
    if (q < 3 || q > oracle::kMaxInteractionPlayers) {
      throw ConfigError("interaction study player count must be in [3, " +
                        std::to_string(oracle::kMaxInteractionPlayers) + "]");
    }
    const DesignSystem system = build_design_matrix(enumerate_coalitions(q));
    const ConstrainedWlsSolver solver(system);
    const int geo = q - 1;
    std::mt19937_64 gen(detail::splitmix64(seed ^ static_cast<std::uint64_t>(q)));
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    std::uniform_real_distribution<double> scale(0.25, 4.0);
    std::uniform_int_distribution<int> feature(0, q - 2);
    std::bernoulli_distribution flip(0.5);

    std::vector<double> ratios;
    for (int game = 0; game < games_per_q; ++game) {
      const int j = feature(gen);
      const double a = (flip(gen) ? -1.0 : 1.0) * scale(gen);
      std::vector<double> additive(static_cast<std::size_t>(q));
      for (auto& c : additive) c = coef(gen);
      const double level = coef(gen);
      auto value = [&](std::uint32_t s) {
        double total = level;
        for (int i = 0; i < q; ++i) {
          if ((s >> i) & 1u) total += additive[i];
        }
        if (((s >> geo) & 1u) && ((s >> j) & 1u)) total += a;
        return total;
      };
      const auto v = oracle::Game::tabulate(q, value, geo);
      const WlsSolution sol = solver.solve(Eigen::Map<const Vector>(
          v.values.data(), static_cast<Eigen::Index>(v.values.size())));
      const double wls = sol.phi[system.interaction_column(j)];
      const double exact = oracle::exact_geo_interaction(v, j);
      ratios.push_back(wls / exact);
    }
    InteractionRatio row;
    row.q = q;
    row.games = games_per_q;
    row.constant = ratios.front();
    for (double r : ratios) {
      row.max_relative_spread = std::max(
          row.max_relative_spread, std::abs(r - row.constant) / std::abs(row.constant));
    }
    out.push_back(row);
  }
  return out;
}

ValidationReport run_validation(const ValidationOptions& options) {
  using simulation::surface_fidelity;
  const auto grid = simulation::generate_dataset(options.seed, options.noise_sd);
  const auto data = options.n ? simulation::generate_dataset(
                                    options.seed, options.noise_sd, options.n)
                              : grid;
  const GeoSpec spec = simulation_spec();
  const BackgroundData background =
      select_background(grid.features(), options.background);
  const Matrix x = data.features();

  ExplainOptions explain;
  explain.workers = options.workers;
  explain.seed = options.seed;
  const TrueModel model;

  ValidationReport report;
  report.seed = options.seed;
  report.noise_sd = options.noise_sd;
  report.grid_size = grid.size();
  report.explained = data.size();
  report.background = background.descriptor;
  report.theoretical_r2 = grid.theoretical_r2();
  report.result = explain_batch(model, x, spec, background, explain);
  const GeoShapleyResult& result = report.result;
  report.base_value = result.base_value;

  for (int i = 0; i < result.size(); ++i) {
    const double scale = std::max(1.0, std::abs(result.prediction[i]));
    report.max_relative_residual = std::max(
        report.max_relative_residual, std::abs(result.reconstruction_residual[i]) / scale);
  }

  report.intrinsic = surface_fidelity(centred(intrinsic_effect(result)),
                                      centred(data.f0_surface));
  const SvcSurface b1 = svc_recover(result, x, 0, spec, background);
  const SvcSurface b2 = svc_recover(result, x, 1, spec, background);
  report.beta1 = surface_fidelity(b1.beta_hat, data.beta1_surface, b1.defined_mask);
  report.beta2 = surface_fidelity(b2.beta_hat, data.beta2_surface, b2.defined_mask);
  report.swapped = surface_fidelity(b1.beta_hat, data.beta2_surface, b1.defined_mask);

  report.f3_slope = fitted_slope(x.col(4), result.phi_main.col(2));
  const Vector x4sq = x.col(5).array().square();
  const double bg_x4sq =
      background.rows.col(5).array().square().matrix().dot(background.row_weights);
  report.f4_coefficient =
      fitted_slope(x4sq.array() - bg_x4sq, result.phi_main.col(3));

  if (options.interaction_study) {
    report.interaction_ratios =
        interaction_ratio_study({3, 4, 5, 6, 7, 8}, options.seed);
  }
  return report;
}

void write_report_json(const ValidationReport& report, std::ostream& out) {
  json ratios = json::array();
  for (const auto& r : report.interaction_ratios) {
    ratios.push_back({{"q", r.q},
                      {"games", r.games},
                      {"constant", r.constant},
                      {"max_relative_spread", r.max_relative_spread}});
  }
  const json doc = {
      {"seed", report.seed},
      {"noise_sd", report.noise_sd},
      {"grid_size", report.grid_size},
      {"explained", report.explained},
      {"background", report.background},
      {"theoretical_r2", report.theoretical_r2},
      {"base_value", report.base_value},
      {"max_relative_residual", report.max_relative_residual},
      {"intrinsic_vs_f0", fidelity_json(report.intrinsic)},
      {"beta1", fidelity_json(report.beta1)},
      {"beta2", fidelity_json(report.beta2)},
      {"swapped_beta1_vs_beta2", fidelity_json(report.swapped)},
      {"f3_slope", report.f3_slope},
      {"f4_coefficient", report.f4_coefficient},
      {"interaction_ratio", ratios},
  };
  out << doc.dump(1) << '\n';
}

void write_report_table(const ValidationReport& report, std::ostream& out) {
  std::ostringstream s;
  s << std::setprecision(6);
  s << "seed " << report.seed << ", explained " << report.explained << " of "
    << report.grid_size << " cells, background " << report.background << "\n";
  s << "theoretical R2          " << report.theoretical_r2 << "\n";
  s << "base value              " << report.base_value << "\n";
  s << "max relative residual   " << report.max_relative_residual << "\n";
  s << std::left << std::setw(24) << "component" << std::setw(14) << "r2"
    << std::setw(14) << "rmse" << "cells\n";
  auto row = [&](const char* name, const simulation::Fidelity& f) {
    s << std::left << std::setw(24) << name << std::setw(14) << f.r2
      << std::setw(14) << f.rmse << f.count << "\n";
  };
  row("intrinsic vs f0", report.intrinsic);
  row("beta1", report.beta1);
  row("beta2", report.beta2);
  row("beta1 vs beta2 (ctrl)", report.swapped);
  s << "f3 slope                " << report.f3_slope << "\n";
  s << "f4 coefficient          " << report.f4_coefficient << "\n";
  for (const auto& r : report.interaction_ratios) {
    s << "interaction ratio q=" << r.q << "   " << r.constant << " (spread "
      << r.max_relative_spread << ")\n";
  }
  out << s.str();
}

std::vector<VarianceRow> background_variance(
    const BackgroundVarianceOptions& options) {
  if (options.reps < 2) throw ConfigError("background variance needs two or more draws");
  if (options.ks.empty()) throw ConfigError("no background sizes given");
  const auto grid = simulation::generate_dataset(options.seed);
  const auto data =
      options.n ? simulation::generate_dataset(options.seed, 1.0, options.n) : grid;
  const GeoSpec spec = simulation_spec();
  const Matrix pool = grid.features();
  const Matrix x = data.features();
  const TrueModel model;
  ExplainOptions explain;
  explain.workers = options.workers;
  explain.seed = options.seed;

  std::vector<VarianceRow> rows;
  for (int k : options.ks) {
    Matrix draws(options.reps, x.rows());
    for (int r = 0; r < options.reps; ++r) {
      const std::uint64_t seed = detail::splitmix64(
          options.seed ^ detail::splitmix64((static_cast<std::uint64_t>(k) << 32) |
                                            static_cast<std::uint64_t>(r)));
      const BackgroundData bg = select_background(pool, BackgroundSpec::sample(k, seed));
      draws.row(r) = explain_batch(model, x, spec, bg, explain).phi_geo.transpose();
    }
    const Eigen::RowVectorXd mean = draws.colwise().mean();
    const Eigen::RowVectorXd var =
        (draws.rowwise() - mean).array().square().colwise().sum() /
        static_cast<double>(options.reps - 1);
    rows.push_back({k, options.reps, static_cast<int>(x.rows()), var.mean()});
  }
  return rows;
}

void write_variance_csv(const std::vector<VarianceRow>& rows, std::ostream& out) {
  out << "k,reps,instances,mean_variance_phi_geo\n";
  for (const auto& r : rows) {
    out << r.k << ',' << r.reps << ',' << r.instances << ','
        << format_double(r.mean_variance) << '\n';
  }
}

}  // namespace geoshap::validation
