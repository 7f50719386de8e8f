#pragma once

// Brute-force Shapley quantities by full subset enumeration. Weights are
// exact rationals built from integer factorials; for double-valued games they
// are converted once per term, for rational games everything stays exact.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace geoshap::oracle {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr int kMaxShapleyPlayers = 20;
inline constexpr int kMaxInteractionPlayers = 18;

// Outcome table over the q effective players, indexed by coalition bitmask.
template <typename Scalar>
struct ValueFunction {
  int q = 0;
  std::optional<int> geo_player;
  std::vector<Scalar> values;

  static ValueFunction tabulate(int q,
                                const std::function<Scalar(std::uint32_t)>& fn,
                                std::optional<int> geo_player = std::nullopt);

  const Scalar& operator()(std::uint32_t coalition) const {
    return values[coalition];
  }
  std::uint32_t full() const { return (1u << q) - 1u; }
};

using Game = ValueFunction<double>;
using ExactGame = ValueFunction<Rational>;

// Collapses a game over p raw players into the effective game where the
// players in geo_set act jointly. Effective players are the non-GEO raw
// players in index order followed by GEO; "GEO in S" means every raw GEO
// player is present.
template <typename Scalar>
ValueFunction<Scalar> reduce_joint_game(
    int p, const std::vector<int>& geo_set,
    const std::function<Scalar(std::uint32_t)>& raw_value);

// s!(q-1-s)!/q!
Rational shapley_weight(int q, int s);
// s!(q-2-s)!/q!, the GEO x feature interaction weight with the joint
// normalization over q effective players.
Rational geo_interaction_weight(int q, int s);
// s!(q-2-s)!/(2(q-1)!)
Rational pairwise_interaction_weight(int q, int s);

// Classic Shapley value of player j.
template <typename Scalar>
Scalar exact_shapley(const ValueFunction<Scalar>& v, int j);

// Joint-player value of GEO. Requires v.geo_player.
template <typename Scalar>
Scalar exact_joint_geo(const ValueFunction<Scalar>& v);

// Value of non-GEO player j in the reduced game.
template <typename Scalar>
Scalar exact_geo_feature(const ValueFunction<Scalar>& v, int j);

// GEO x j interaction, normalized as geo_interaction_weight.
template <typename Scalar>
Scalar exact_geo_interaction(const ValueFunction<Scalar>& v, int j);

// Pairwise Shapley interaction between players i and j.
template <typename Scalar>
Scalar exact_pairwise_interaction(const ValueFunction<Scalar>& v, int i, int j);

}  // namespace geoshap::oracle
