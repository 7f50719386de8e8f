#include <gtest/gtest.h>

#include <random>

#include "geoshap/coalition.hpp"
#include "geoshap/errors.hpp"
#include "geoshap/oracle.hpp"
#include "geoshap/solver.hpp"

namespace geoshap {
namespace {

DesignSystem with_values(int q, bool interactions,
                         const std::function<double(std::uint32_t)>& v) {
  DesignSystem sys = build_design_matrix(enumerate_coalitions(q), interactions);
  sys.values.resize(sys.z.rows());
  for (Eigen::Index r = 0; r < sys.z.rows(); ++r) sys.values[r] = v(sys.coalitions[r].bits);
  return sys;
}

Vector random_values(int q, std::mt19937_64& gen) {
  std::normal_distribution<double> d(0.0, 3.0);
  Vector v(1 << q);
  for (auto& x : v) x = d(gen);
  return v;
}

TEST(Solver, RecoversRepresentableGame) {
  const double a = 1.5, b = -2.0, c = 0.75, d = 4.0;
  // p = 3, g = 2: players X1 (bit 0) and GEO (bit 1).
  const auto sys = with_values(2, true, [&](std::uint32_t s) {
    const bool x1 = s & 1u, geo = s & 2u;
    return c + a * x1 + b * geo + d * (x1 && geo);
  });
  const auto sol = solve_constrained_wls(sys);
  EXPECT_NEAR(sol.phi[sys.main_column(0)], a, 1e-12);
  EXPECT_NEAR(sol.phi[sys.interaction_column(0)], d, 1e-12);
  EXPECT_NEAR(sol.phi[sys.geo_column()], b, 1e-12);
  EXPECT_EQ(sol.phi[sys.intercept_column()], c);
  EXPECT_NEAR(sol.residual_norm, 0.0, 1e-12);
}

TEST(Solver, NullGame) {
  const auto sys = with_values(4, true, [](std::uint32_t) { return 2.5; });
  const auto sol = solve_constrained_wls(sys);
  for (int c = 0; c < sys.num_columns(); ++c) {
    if (c == sys.intercept_column()) {
      EXPECT_EQ(sol.phi[c], 2.5);
    } else {
      EXPECT_NEAR(sol.phi[c], 0.0, 1e-12);
    }
  }
}

TEST(Solver, ClassicModeReproducesThreePlayerGame) {
  // A = bit 0, B = bit 1, C = GEO = bit 2.
  const double table[] = {0, 5, 10, 5, 100, 120, 140, 150};
  const auto sys = with_values(3, false, [&](std::uint32_t s) { return table[s]; });
  const auto sol = solve_constrained_wls(sys);
  EXPECT_NEAR(sol.phi[0], 7.5, 1e-10);
  EXPECT_NEAR(sol.phi[1], 20.0, 1e-10);
  EXPECT_NEAR(sol.phi[sys.geo_column()], 122.5, 1e-10);
  EXPECT_EQ(sol.phi[sys.intercept_column()], 0.0);
}

TEST(Solver, ConstraintsExact) {
  std::mt19937_64 gen(7);
  for (int q = 2; q <= 9; ++q) {
    for (bool interactions : {true, false}) {
      DesignSystem sys = build_design_matrix(enumerate_coalitions(q), interactions);
      sys.values = random_values(q, gen);
      const auto sol = solve_constrained_wls(sys);
      EXPECT_EQ(sol.phi[sys.intercept_column()], sys.values[0]);
      const double full = sys.values[sys.values.size() - 1];
      EXPECT_LE(std::abs(sol.phi.sum() - full), 1e-10 * std::max(1.0, std::abs(full)));
      EXPECT_GE(sol.condition_hint, 1.0);
    }
  }
}

TEST(Solver, ClassicModeMatchesBruteForce) {
  std::mt19937_64 gen(11);
  for (int q = 2; q <= 10; ++q) {
    DesignSystem sys = build_design_matrix(enumerate_coalitions(q), false);
    sys.values = random_values(q, gen);
    const auto sol = solve_constrained_wls(sys);
    const std::vector<double> table(sys.values.data(), sys.values.data() + sys.values.size());
    oracle::Game game{q, q - 1, table};
    for (int j = 0; j < q - 1; ++j) {
      EXPECT_NEAR(sol.phi[j], oracle::exact_shapley(game, j), 1e-8) << q;
    }
    EXPECT_NEAR(sol.phi[sys.geo_column()], oracle::exact_shapley(game, q - 1), 1e-8);
  }
}

TEST(Solver, ScaleEquivariance) {
  std::mt19937_64 gen(3);
  DesignSystem sys = build_design_matrix(enumerate_coalitions(6));
  const ConstrainedWlsSolver solver(sys);
  const Vector v = random_values(6, gen);
  const Vector base = solver.solve(v).phi;
  for (double c : {-3.0, 0.5, 1e3}) {
    const Vector scaled = solver.solve(c * v).phi;
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      EXPECT_NEAR(scaled[i], c * base[i], 1e-10 * std::max(1.0, std::abs(c * base[i])));
    }
  }
}

TEST(Solver, PermutationEquivariance) {
  std::mt19937_64 gen(5);
  const int q = 5;
  const Vector v = random_values(q, gen);
  // Swap non-location players 0 and 2.
  auto swap_bits = [](std::uint32_t s) {
    const std::uint32_t b0 = s & 1u, b2 = (s >> 2) & 1u;
    return (s & ~5u) | (b0 << 2) | b2;
  };
  Vector permuted(v.size());
  for (std::uint32_t s = 0; s < (1u << q); ++s) permuted[swap_bits(s)] = v[s];
  const DesignSystem sys = build_design_matrix(enumerate_coalitions(q));
  const ConstrainedWlsSolver solver(sys);
  const Vector a = solver.solve(v).phi;
  const Vector b = solver.solve(permuted).phi;
  for (auto [i, j] : {std::pair{0, 2}, std::pair{1, 1}, std::pair{3, 3}}) {
    EXPECT_NEAR(a[sys.main_column(i)], b[sys.main_column(j)], 1e-10);
    EXPECT_NEAR(a[sys.interaction_column(i)], b[sys.interaction_column(j)], 1e-10);
  }
  EXPECT_NEAR(a[sys.geo_column()], b[sys.geo_column()], 1e-10);
}

TEST(Solver, SingleFeatureSplitDetermined) {
  // q = 2 leaves two informative rows for two unknowns: exact fit.
  std::mt19937_64 gen(9);
  DesignSystem sys = build_design_matrix(enumerate_coalitions(2));
  sys.values = random_values(2, gen);
  const auto sol = solve_constrained_wls(sys);
  EXPECT_NEAR(sol.residual_norm, 0.0, 1e-12);
}

TEST(Solver, RankDeficiencyReported) {
  DesignSystem sys = build_design_matrix(enumerate_coalitions(3));
  // Drop every finite row containing player 1: its columns become unidentified.
  for (Eigen::Index r = 0; r < sys.z.rows(); ++r) {
    if (!sys.weights[r].infinite && sys.coalitions[r].has(1)) sys.weights[r].value = 0.0;
  }
  try {
    ConstrainedWlsSolver solver(sys);
    FAIL() << "expected rank deficiency";
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("rank deficient"), std::string::npos);
    EXPECT_NE(msg.find("columns"), std::string::npos);
    EXPECT_EQ(e.exit_code(), 5);
  }
}

TEST(Solver, ValueLengthChecked) {
  const DesignSystem sys = build_design_matrix(enumerate_coalitions(3));
  const ConstrainedWlsSolver solver(sys);
  EXPECT_THROW(solver.solve(Vector::Zero(7)), ConfigError);
  DesignSystem empty = sys;
  EXPECT_THROW(solve_constrained_wls(empty), ConfigError);
}

}  // namespace
}  // namespace geoshap
