#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "geoshap/models.hpp"
#include "geoshap/types.hpp"

namespace geoshap {

inline constexpr int kMaxPlayers = 25;

// Subset of the q effective players. Bit i is non-location feature i for
// i < q - 1; bit q - 1 is GEO.
struct Coalition {
  std::uint32_t bits = 0;
  int q = 0;

  int size() const { return std::popcount(bits); }
  bool has(int player) const { return (bits >> player) & 1u; }
  bool has_geo() const { return has(q - 1); }
  bool empty() const { return bits == 0; }
  bool full() const { return size() == q; }
};

// All 2^q coalitions in ascending order of their bit pattern. First entry is
// empty, last is full. Throws CapacityError for q > kMaxPlayers.
std::vector<Coalition> enumerate_coalitions(int q);

// Shapley kernel weight. Empty and full coalitions have unbounded weight and
// are reported through the flag rather than a large number.
struct KernelWeight {
  double value = 0.0;
  bool infinite = false;
};

// (q - 1) / (C(q, s) * s * (q - s)), or the infinite flag for s in {0, q}.
KernelWeight kernel_weight(int q, int s);

// Z matrix, kernel weights, and (once filled) coalition values for one
// instance.
//
// Column layout with interactions:
//   [main_0 .. main_{k-1} | geo_x_0 .. geo_x_{k-1} | GEO | intercept]
// and in classic mode (interactions suppressed):
//   [main_0 .. main_{k-1} | GEO | intercept]
// where k = q - 1.
struct DesignSystem {
  int q = 0;
  bool with_interactions = true;
  std::vector<Coalition> coalitions;
  Matrix z;
  std::vector<KernelWeight> weights;
  Vector values;

  int num_features() const { return q - 1; }
  int num_columns() const { return static_cast<int>(z.cols()); }
  int main_column(int j) const { return j; }
  int interaction_column(int j) const { return num_features() + j; }
  int geo_column() const {
    return with_interactions ? 2 * num_features() : num_features();
  }
  int intercept_column() const { return geo_column() + 1; }
};

DesignSystem build_design_matrix(const std::vector<Coalition>& coalitions,
                                 bool with_interactions = true);
DesignSystem build_design_matrix(const std::vector<Coalition>& coalitions,
                                 const GeoSpec& spec,
                                 bool with_interactions = true);

// Writes the m masked rows for `coalition` into `out` (m x p). Columns whose
// player is present come from the instance, the rest from the background.
void write_masked_block(const Vector& instance, const Coalition& coalition,
                        const GeoSpec& spec, const BackgroundData& background,
                        Eigen::Ref<Matrix> out);

Matrix synthesize_masked_samples(const Vector& instance,
                                 const Coalition& coalition,
                                 const GeoSpec& spec,
                                 const BackgroundData& background);

// Background-weighted mean prediction over the masked samples.
double coalition_value(const Predictor& predictor, const Vector& instance,
                       const Coalition& coalition, const GeoSpec& spec,
                       const BackgroundData& background);

}  // namespace geoshap
