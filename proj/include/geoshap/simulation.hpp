#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>

#include "geoshap/types.hpp"

namespace geoshap::simulation {

inline constexpr int kGridSize = 50;
inline constexpr int kGridCells = kGridSize * kGridSize;
inline constexpr double kCoordMax = kGridSize - 1;

// Intrinsic location effect: a dome peaking at the grid centre, zero on the
// u = 0 and v = 0 edges.
double f0(double u, double v);
// Spatially varying slopes; beta2 is beta1 mirrored in u. Both average to 3
// over the grid.
double beta1(double u, double v);
double beta2(double u, double v);

struct DgpComponents {
  double f0 = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  double f4 = 0.0;

  double sum() const { return f0 + f1 + f2 + f3 + f4; }
};

// Throws DataError when u or v lies outside [0, 49].
DgpComponents dgp_components(double u, double v, double x1, double x2,
                             double x3, double x4);

struct SimulatedDataset {
  Matrix coords;  // n x 2, (u, v)
  Matrix x;       // n x 4, X1..X4 ~ U(-2, 2)
  Vector y_signal;
  Vector y;
  Vector f0_surface;
  Vector beta1_surface;
  Vector beta2_surface;
  std::uint64_t seed = 0;
  double noise_sd = 1.0;

  int size() const { return static_cast<int>(coords.rows()); }
  // n x 6 predictor inputs (u, v, x1, x2, x3, x4).
  Matrix features() const;
  // Var(y_signal) / (Var(y_signal) + noise_sd^2) on this sample.
  double theoretical_r2() const;
};

// Grid cells are visited u-major (cell = u * 50 + v). Each cell draws from
// its own generator derived from (seed, cell), so a subsample shares values
// with the full grid. n_override selects that many cells without
// replacement, returned in grid order.
SimulatedDataset generate_dataset(std::uint64_t seed, double noise_sd = 1.0,
                                  std::optional<int> n_override = std::nullopt);

struct Fidelity {
  double r2 = 0.0;
  double rmse = 0.0;
  int count = 0;
};

// R^2 = 1 - SSE/SST and RMSE over entries where mask is true. An empty mask
// means all entries.
Fidelity surface_fidelity(const Vector& recovered, const Vector& truth,
                          const std::vector<bool>& mask = {});

// Header: u,v,X1,X2,X3,X4,y_signal,y,f0,beta1,beta2
void write_dataset_csv(const SimulatedDataset& data, std::ostream& out);

}  // namespace geoshap::simulation
