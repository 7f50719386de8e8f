#include <gtest/gtest.h>

#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "geoshap/errors.hpp"
#include "geoshap/simulation.hpp"

namespace geoshap::simulation {
namespace {

using Rational = boost::multiprecision::cpp_rational;

TEST(Dgp, DomeValues) {
  EXPECT_EQ(f0(0, 0), 0.0);
  EXPECT_EQ(f0(0, 31), 0.0);
  EXPECT_EQ(f0(17, 0), 0.0);
  EXPECT_NEAR(f0(25, 25), 6.0 / 20736.0 * 24414.0625, 1e-12);
  EXPECT_NEAR(f0(25, 25), 7.064254, 1e-6);
  double best = -1.0;
  int bu = -1, bv = -1;
  for (int u = 0; u < kGridSize; ++u) {
    for (int v = 0; v < kGridSize; ++v) {
      EXPECT_GE(f0(u, v), 0.0);
      if (f0(u, v) > best) {
        best = f0(u, v);
        bu = u;
        bv = v;
      }
    }
  }
  EXPECT_EQ(bu, 25);
  EXPECT_EQ(bv, 25);
}

TEST(Dgp, GridMeansOfCoefficientsAreExactlyThree) {
  // beta1 = 1 + 2(u+v)/49, beta2 = 1 + 2((49-u)+v)/49 in exact arithmetic.
  Rational sum1 = 0, sum2 = 0;
  for (int u = 0; u < kGridSize; ++u) {
    for (int v = 0; v < kGridSize; ++v) {
      sum1 += 1 + Rational(2 * (u + v), 49);
      sum2 += 1 + Rational(2 * ((49 - u) + v), 49);
      EXPECT_NEAR(beta1(u, v), static_cast<double>(1 + Rational(2 * (u + v), 49)), 1e-15);
      EXPECT_DOUBLE_EQ(beta2(u, v), beta1(49 - u, v));
    }
  }
  EXPECT_EQ(sum1 / kGridCells, 3);
  EXPECT_EQ(sum2 / kGridCells, 3);
}

TEST(Dgp, ComponentsAndRange) {
  const auto c = dgp_components(25, 25, 1.0, -1.0, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(c.f1, beta1(25, 25));
  EXPECT_DOUBLE_EQ(c.f2, -beta2(25, 25));
  EXPECT_DOUBLE_EQ(c.f3, 2.0);
  EXPECT_DOUBLE_EQ(c.f4, 4.0);
  // The linear slope equals two thirds of E(beta1).
  EXPECT_DOUBLE_EQ(c.f3, 2.0 / 3.0 * 3.0);
  EXPECT_THROW(dgp_components(49.5, 0, 0, 0, 0, 0), DataError);
  EXPECT_THROW(dgp_components(0, -0.1, 0, 0, 0, 0), DataError);
}

TEST(Dataset, FullGridShapeAndInvariants) {
  const auto ds = generate_dataset(42);
  ASSERT_EQ(ds.size(), 2500);
  EXPECT_EQ(ds.x.cols(), 4);
  EXPECT_LE(ds.x.maxCoeff(), 2.0);
  EXPECT_GE(ds.x.minCoeff(), -2.0);
  EXPECT_NEAR(ds.beta1_surface.mean(), 3.0, 1e-12);
  EXPECT_NEAR(ds.beta2_surface.mean(), 3.0, 1e-12);
  const double noise_mean = (ds.y - ds.y_signal).mean();
  EXPECT_LE(std::abs(noise_mean), 4.0 / std::sqrt(2500.0));
  for (int i = 0; i < ds.size(); ++i) {
    const auto c = dgp_components(ds.coords(i, 0), ds.coords(i, 1), ds.x(i, 0), ds.x(i, 1),
                                  ds.x(i, 2), ds.x(i, 3));
    EXPECT_DOUBLE_EQ(ds.y_signal[i], c.sum());
    EXPECT_EQ(ds.coords(i, 0), i / 50);
    EXPECT_EQ(ds.coords(i, 1), i % 50);
  }
}

TEST(Dataset, TheoreticalR2) {
  const auto ds = generate_dataset(42);
  EXPECT_NEAR(ds.theoretical_r2(), 0.975, 0.01);
}

TEST(Dataset, NoiselessAndDeterministic) {
  const auto a = generate_dataset(7, 0.0);
  EXPECT_EQ(a.y, a.y_signal);
  const auto b = generate_dataset(9);
  const auto c = generate_dataset(9);
  std::ostringstream sb, sc;
  write_dataset_csv(b, sb);
  write_dataset_csv(c, sc);
  EXPECT_EQ(sb.str(), sc.str());
  EXPECT_EQ(sb.str().substr(0, sb.str().find('\n')), "u,v,X1,X2,X3,X4,y_signal,y,f0,beta1,beta2");
  EXPECT_NE(generate_dataset(10).x, b.x);
}

TEST(Dataset, SubsampleSharesCellValues) {
  const auto full = generate_dataset(5);
  const auto sub = generate_dataset(5, 1.0, 400);
  ASSERT_EQ(sub.size(), 400);
  int prev = -1;
  for (int i = 0; i < sub.size(); ++i) {
    const int cell = static_cast<int>(sub.coords(i, 0)) * 50 + static_cast<int>(sub.coords(i, 1));
    EXPECT_GT(cell, prev);
    prev = cell;
    EXPECT_EQ(sub.x.row(i), full.x.row(cell));
    EXPECT_EQ(sub.y[i], full.y[cell]);
  }
  EXPECT_THROW(generate_dataset(5, 1.0, 0), ConfigError);
  EXPECT_THROW(generate_dataset(5, -1.0), ConfigError);
}

TEST(Fidelity, Definitions) {
  Vector truth = Vector::LinSpaced(50, 0.0, 49.0);
  const auto same = surface_fidelity(truth, truth);
  EXPECT_EQ(same.r2, 1.0);
  EXPECT_EQ(same.rmse, 0.0);
  EXPECT_EQ(same.count, 50);

  const double offset = 0.5;
  const Vector shifted = truth.array() + offset;
  const double sst = (truth.array() - truth.mean()).square().sum();
  const auto off = surface_fidelity(shifted, truth);
  EXPECT_NEAR(off.rmse, offset, 1e-12);
  EXPECT_NEAR(off.r2, 1.0 - offset * offset * 50 / sst, 1e-12);

  const auto flat = surface_fidelity(Vector::Constant(50, truth.mean()), truth);
  EXPECT_NEAR(flat.r2, 0.0, 1e-12);
}

TEST(Fidelity, MaskAndErrors) {
  Vector truth = Vector::LinSpaced(40, 0.0, 1.0);
  std::vector<bool> mask(40, true);
  Vector recovered = truth;
  recovered[3] = 1e6;
  mask[3] = false;
  EXPECT_EQ(surface_fidelity(recovered, truth, mask).count, 39);
  EXPECT_EQ(surface_fidelity(recovered, truth, mask).r2, 1.0);
  std::vector<bool> few(40, false);
  for (int i = 0; i < 10; ++i) few[i] = true;
  EXPECT_THROW(surface_fidelity(truth, truth, few), DataError);
  EXPECT_THROW(surface_fidelity(truth, Vector::Constant(40, 2.0)), NumericalError);
}

}  // namespace
}  // namespace geoshap::simulation
