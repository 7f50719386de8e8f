// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "geoshap/background.hpp"
#include "geoshap/coalition.hpp"
#include "geoshap/explainer.hpp"
#include "geoshap/models.hpp"
#include "geoshap/oracle.hpp"
#include "geoshap/postprocess.hpp"
#include "geoshap/result_io.hpp"
#include "geoshap/simulation.hpp"
#include "geoshap/solver.hpp"
#include "geoshap/validation.hpp"

namespace {

using namespace geoshap;
using oracle::Rational;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c, d);
  return buf;
}

GeoSpec grid_spec() { return GeoSpec({"u", "v", "X1", "X2", "X3", "X4"}, {0, 1}); }

void exact_worked_game() {
  const auto start = Clock::now();
  const int outcome[] = {0, 5, 10, 5, 100, 120, 140, 150};
  const auto v = oracle::ExactGame::tabulate(
      3, [&](std::uint32_t s) { return Rational(outcome[s]); });
  const Rational a = oracle::exact_shapley(v, 0);
  const Rational b = oracle::exact_shapley(v, 1);
  const Rational c = oracle::exact_shapley(v, 2);
  const double t = seconds_since(start);
  const bool ok = a == Rational(15, 2) && b == 20 && c == Rational(245, 2) &&
                  a + b + c == 150 && t < 1.0;
  std::ostringstream d;
  d << "phi = " << a << ", " << b << ", " << c << "; sum " << (a + b + c) << "; "
    << fmt("%.4f s", t);
  report(1, ok, d.str());
}

void local_efficiency() {
  const auto data = simulation::generate_dataset(42);
  const Matrix x = data.features();
  const TrueModel model;
  const GeoSpec spec = grid_spec();
  const BackgroundData bg = select_background(x, BackgroundSpec::kmeans(50, 42));

  ExplainOptions options;
  options.workers = 0;
  auto max_rel = [](const GeoShapleyResult& r) {
    double worst = 0.0;
    for (int i = 0; i < r.size(); ++i) {
      worst = std::max(worst, std::abs(r.reconstruction_residual[i]) /
                                  std::max(1.0, std::abs(r.prediction[i])));
    }
    return worst;
  };

  auto start = Clock::now();
  const Matrix sub = simulation::generate_dataset(42, 1.0, 400).features();
  const double sub_res = max_rel(explain_batch(model, sub, spec, bg, options));
  const double sub_t = seconds_since(start);

  start = Clock::now();
  const double full_res = max_rel(explain_batch(model, x, spec, bg, options));
  const double full_t = seconds_since(start);

  const bool ok = sub_res <= 1e-8 && full_res <= 1e-8 && sub_t < 60.0 && full_t < 600.0;
  report(2, ok,
         fmt("full grid max rel residual %.2e in %.2f s; 400-cell %.2e in %.2f s", full_res,
             full_t, sub_res, sub_t));
}

validation::ValidationReport recovery_run(int workers) {
  validation::ValidationOptions options;
  options.n = 400;
  options.workers = workers;
  options.interaction_study = false;
  return validation::run_validation(options);
}

void ground_truth_recovery(const validation::ValidationReport& r) {
  const bool ok = r.intrinsic.r2 >= 0.99 && r.beta1.r2 >= 0.98 && r.beta2.r2 >= 0.98 &&
                  std::abs(r.f3_slope - 2.0) <= 0.02 * 2.0 &&
                  std::abs(r.f4_coefficient - 1.0) <= 0.05;
  report(3, ok,
         fmt("intrinsic r2 %.5f, beta1 r2 %.5f, beta2 r2 %.5f, ", r.intrinsic.r2, r.beta1.r2,
             r.beta2.r2) +
             fmt("f3 slope %.5f, f4 coefficient %.5f", r.f3_slope, r.f4_coefficient));
}

void classic_reduction() {
  std::mt19937_64 gen(404);
  std::uniform_int_distribution<int> pick_q(3, 8);
  std::normal_distribution<double> value(0.0, 5.0);
  double worst = 0.0;
  for (int game = 0; game < 50; ++game) {
    const int q = pick_q(gen);
    DesignSystem sys = build_design_matrix(enumerate_coalitions(q), false);
    sys.values.resize(sys.z.rows());
    for (auto& v : sys.values) v = value(gen);
    const auto sol = solve_constrained_wls(sys);
    const std::vector<double> table(sys.values.data(), sys.values.data() + sys.values.size());
    const oracle::Game v{q, q - 1, table};
    for (int j = 0; j < q - 1; ++j) {
      worst = std::max(worst, std::abs(sol.phi[j] - oracle::exact_shapley(v, j)));
    }
    worst = std::max(worst, std::abs(sol.phi[sys.geo_column()] -
                                     oracle::exact_shapley(v, q - 1)));
  }
  report(4, worst <= 1e-8, fmt("50 games, max |WLS - exact| %.2e", worst));
}

void oracle_consistency() {
  std::mt19937_64 gen(505);
  std::uniform_int_distribution<int> num(-60, 60), den(1, 9);
  int exact_ok = 0;
  for (int game = 0; game < 100; ++game) {
    const int p = 3 + game % 6;
    const int g = 1 + static_cast<int>(gen() % static_cast<std::uint64_t>(p - 1));
    std::vector<int> cols(static_cast<std::size_t>(p));
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(cols.begin(), cols.end(), gen);
    const std::vector<int> geo(cols.begin(), cols.begin() + g);
    std::vector<Rational> raw(std::size_t{1} << p);
    for (auto& r : raw) r = Rational(num(gen), den(gen));
    const auto v = oracle::reduce_joint_game<Rational>(
        p, geo, [&](std::uint32_t s) { return raw[s]; });
    Rational total = oracle::exact_joint_geo(v);
    for (int j = 0; j < v.q - 1; ++j) total += oracle::exact_geo_feature(v, j);
    if (total == v(v.full()) - v(0)) ++exact_ok;
  }

  // Additively separable: v(S) = level + sum of per-player terms.
  int zero_exact = 0;
  double worst_wls = 0.0;
  for (int game = 0; game < 100; ++game) {
    const int q = 3 + game % 6;
    const int geo = q - 1;
    std::vector<Rational> term(static_cast<std::size_t>(q));
    for (auto& t : term) t = Rational(num(gen), den(gen));
    const Rational level(num(gen), den(gen));
    const auto v = oracle::ExactGame::tabulate(
        q,
        [&](std::uint32_t s) {
          Rational total = level;
          for (int i = 0; i < q; ++i) {
            if ((s >> i) & 1u) total += term[i];
          }
          return total;
        },
        geo);
    bool all_zero = true;
    for (int j = 0; j < q - 1; ++j) all_zero &= oracle::exact_geo_interaction(v, j) == 0;
    if (all_zero) ++zero_exact;

    DesignSystem sys = build_design_matrix(enumerate_coalitions(q));
    sys.values.resize(sys.z.rows());
    for (Eigen::Index r = 0; r < sys.z.rows(); ++r) {
      sys.values[r] = static_cast<double>(v(sys.coalitions[r].bits));
    }
    const auto sol = solve_constrained_wls(sys);
    for (int j = 0; j < q - 1; ++j) {
      worst_wls = std::max(worst_wls, std::abs(sol.phi[sys.interaction_column(j)]));
    }
  }
  const bool ok = exact_ok == 100 && zero_exact == 100 && worst_wls <= 1e-8;
  report(5, ok,
         fmt("exact efficiency %.0f/100, zero oracle interaction %.0f/100, "
             "max |WLS interaction| %.2e",
             exact_ok, zero_exact, worst_wls));
}

void interaction_study(const std::vector<validation::InteractionRatio>& rows) {
  bool ok = !rows.empty();
  std::ostringstream d;
  d << "constants by q:";
  for (const auto& r : rows) {
    ok &= r.max_relative_spread <= 1e-6;
    char buf[96];
    std::snprintf(buf, sizeof(buf), " %d->%.12g (spread %.1e)", r.q, r.constant,
                  r.max_relative_spread);
    d << buf;
  }
  report(6, ok, d.str());
}

void linear_closed_form() {
  std::mt19937_64 gen(707);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const int n = 200;
  // Columns X1, X2, loc; the location column carries a zero coefficient.
  Matrix x(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < 3; ++c) x(i, c) = u(gen);
  }
  const OlsModel model(Vector{{3.0, 2.0, 1.0, 0.0}});
  const GeoSpec spec({"X1", "X2", "loc"}, {2});
  const BackgroundData bg = select_background(x, BackgroundSpec::full());
  const GeoShapleyResult r = explain_batch(model, x, spec, bg);
  const double beta[] = {2.0, 1.0};
  double worst = 0.0;
  for (int j = 0; j < 2; ++j) {
    const double mean = bg.rows.col(j).dot(bg.row_weights);
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(r.phi_main(i, j) - beta[j] * (x(i, j) - mean)));
    }
  }
  report(7, worst <= 1e-8, fmt("max |phi_j - beta_j (x - mean)| %.2e", worst));
}

void true_r2() {
  const double r2 = simulation::generate_dataset(42).theoretical_r2();
  report(8, std::abs(r2 - 0.975) <= 0.01, fmt("theoretical R2 %.5f", r2));
}

void background_variance() {
  validation::BackgroundVarianceOptions options;
  options.n = 200;
  options.workers = 0;
  const auto rows = validation::background_variance(options);
  auto at = [&](int k) {
    for (const auto& r : rows) {
      if (r.k == k) return r.mean_variance;
    }
    return std::nan("");
  };
  const double v5 = at(5), v10 = at(10), v50 = at(50);
  const double ratio = v50 / v5;
  const bool ok = v50 < v5 && v50 < v10 && ratio <= 0.25;
  std::ostringstream d;
  for (const auto& r : rows) d << "k=" << r.k << ' ' << fmt("%.4f", r.mean_variance) << "; ";
  d << fmt("k50/k5 %.4f (threshold 0.25)", ratio);
  report(9, ok, d.str());
}

void percent_anchor() {
  // 10^phi = 1 + percent / 100.
  const double level = log10_to_percent(5.634) / 100.0 + 1.0;
  const double rel = std::abs(level - 430788.0) / 430788.0;
  report(10, rel <= 1e-3, fmt("10^5.634 = %.1f, relative gap to 430788 %.5f", level, rel));
}

void determinism() {
  auto serialize = [](int workers) {
    const auto r = recovery_run(workers);
    std::ostringstream s;
    write_result_json(r.result, s);
    return s.str();
  };
  const std::string one = serialize(1);
  const std::string eight = serialize(8);
  report(11, one == eight && !one.empty(),
         fmt("result JSON %.0f bytes, identical: ", static_cast<double>(one.size())) +
             (one == eight ? "yes" : "no"));
}

}  // namespace

int main() {
  try {
    exact_worked_game();
    local_efficiency();
    const auto recovery = recovery_run(1);
    ground_truth_recovery(recovery);
    classic_reduction();
    oracle_consistency();
    interaction_study(validation::interaction_ratio_study({3, 4, 5, 6, 7, 8}, 42));
    linear_closed_form();
    true_r2();
    background_variance();
    percent_anchor();
    determinism();
  } catch (const std::exception& e) {
    std::printf("aborted: %s\n", e.what());
    return 2;
  }
  std::printf("criterion 12: NOT RUN  secondary (reference bridge server not built)\n");
  std::printf("%s\n", failures == 0 ? "all primary criteria passed" : "failures present");
  return failures == 0 ? 0 : 1;
}
