#include "geoshap/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "geoshap/errors.hpp"
#include "geoshap/io.hpp"

namespace geoshap::simulation {
namespace {

constexpr double kDomeScale = 6.0 / (12.0 * 12.0 * 12.0 * 12.0);
constexpr double kHalfWidth = 12.5;

void check_coords(double u, double v) {
  if (!(u >= 0.0 && u <= kCoordMax && v >= 0.0 && v <= kCoordMax)) {
    throw DataError("coordinates (" + format_double(u) + ", " +
                    format_double(v) + ") outside the [0, 49] grid");
  }
}

std::mt19937_64 cell_generator(std::uint64_t seed, int cell) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(cell), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace

double f0(double u, double v) {
  const double hu = kHalfWidth - u / 2.0;
  const double hv = kHalfWidth - v / 2.0;
  return kDomeScale * (kHalfWidth * kHalfWidth - hu * hu) *
         (kHalfWidth * kHalfWidth - hv * hv);
}

double beta1(double u, double v) { return 1.0 + 2.0 * (u + v) / kCoordMax; }

double beta2(double u, double v) {
  return 1.0 + 2.0 * ((kCoordMax - u) + v) / kCoordMax;
}

DgpComponents dgp_components(double u, double v, double x1, double x2,
                             double x3, double x4) {
  check_coords(u, v);
  return DgpComponents{f0(u, v), beta1(u, v) * x1, beta2(u, v) * x2, 2.0 * x3,
                       x4 * x4};
}

Matrix SimulatedDataset::features() const {
  Matrix out(size(), 6);
  out.leftCols(2) = coords;
  out.rightCols(4) = x;
  return out;
}

double SimulatedDataset::theoretical_r2() const {
  const double mean = y_signal.mean();
  const double var = (y_signal.array() - mean).square().sum() /
                     static_cast<double>(y_signal.size());
  return var / (var + noise_sd * noise_sd);
}

SimulatedDataset generate_dataset(std::uint64_t seed, double noise_sd,
                                  std::optional<int> n_override) {
  if (noise_sd < 0.0) throw ConfigError("noise_sd must be non-negative");
  std::vector<int> cells(kGridCells);
  std::iota(cells.begin(), cells.end(), 0);
  if (n_override) {
    const int n = *n_override;
    if (n < 1 || n > kGridCells) {
      throw ConfigError("subsample size must be in [1, 2500], got " +
                        std::to_string(n));
    }
    std::mt19937_64 picker(seed ^ 0x5eedce11u);
    std::vector<int> chosen;
    chosen.reserve(n);
    std::sample(cells.begin(), cells.end(), std::back_inserter(chosen), n,
                picker);
    cells = std::move(chosen);
  }

  const int n = static_cast<int>(cells.size());
  SimulatedDataset ds;
  ds.seed = seed;
  ds.noise_sd = noise_sd;
  ds.coords.resize(n, 2);
  ds.x.resize(n, 4);
  ds.y_signal.resize(n);
  ds.y.resize(n);
  ds.f0_surface.resize(n);
  ds.beta1_surface.resize(n);
  ds.beta2_surface.resize(n);

  for (int i = 0; i < n; ++i) {
    const int cell = cells[i];
    const double u = cell / kGridSize;
    const double v = cell % kGridSize;
    auto gen = cell_generator(seed, cell);
    std::uniform_real_distribution<double> uniform(-2.0, 2.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    double xs[4];
    for (double& xv : xs) xv = uniform(gen);
    const double eps = normal(gen);

    const DgpComponents comp = dgp_components(u, v, xs[0], xs[1], xs[2], xs[3]);
    ds.coords(i, 0) = u;
    ds.coords(i, 1) = v;
    for (int j = 0; j < 4; ++j) ds.x(i, j) = xs[j];
    ds.y_signal[i] = comp.sum();
    ds.y[i] = ds.y_signal[i] + noise_sd * eps;
    ds.f0_surface[i] = comp.f0;
    ds.beta1_surface[i] = beta1(u, v);
    ds.beta2_surface[i] = beta2(u, v);
  }
  return ds;
}

Fidelity surface_fidelity(const Vector& recovered, const Vector& truth,
                          const std::vector<bool>& mask) {
  if (recovered.size() != truth.size()) {
    throw DataError("recovered and truth lengths differ");
  }
  if (!mask.empty() && static_cast<Eigen::Index>(mask.size()) != truth.size()) {
    throw DataError("mask length differs from surface length");
  }
  auto used = [&](Eigen::Index i) { return mask.empty() || mask[i]; };

  int count = 0;
  double truth_sum = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (!used(i)) continue;
    ++count;
    truth_sum += truth[i];
  }
  if (count < 30) {
    throw DataError("surface fidelity needs at least 30 unmasked points, got " +
                    std::to_string(count));
  }
  const double truth_mean = truth_sum / count;
  double sse = 0.0;
  double sst = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (!used(i)) continue;
    const double r = recovered[i] - truth[i];
    const double d = truth[i] - truth_mean;
    sse += r * r;
    sst += d * d;
  }
  if (sst <= 0.0) throw NumericalError("truth surface has zero variance");
  return Fidelity{1.0 - sse / sst, std::sqrt(sse / count), count};
}

void write_dataset_csv(const SimulatedDataset& data, std::ostream& out) {
  out << "u,v,X1,X2,X3,X4,y_signal,y,f0,beta1,beta2\n";
  for (int i = 0; i < data.size(); ++i) {
    out << format_double(data.coords(i, 0)) << ','
        << format_double(data.coords(i, 1));
    for (int j = 0; j < 4; ++j) out << ',' << format_double(data.x(i, j));
    out << ',' << format_double(data.y_signal[i]) << ','
        << format_double(data.y[i]) << ',' << format_double(data.f0_surface[i])
        << ',' << format_double(data.beta1_surface[i]) << ','
        << format_double(data.beta2_surface[i]) << '\n';
  }
}

}  // namespace geoshap::simulation
