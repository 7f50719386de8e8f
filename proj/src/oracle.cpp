#include "geoshap/oracle.hpp"

#include <bit>
#include <string>
#include <type_traits>

#include "geoshap/errors.hpp"

namespace geoshap::oracle {
namespace {

using boost::multiprecision::cpp_int;

cpp_int factorial(int n) {
  cpp_int out = 1;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

template <typename Scalar>
Scalar convert(const Rational& r) {
  if constexpr (std::is_same_v<Scalar, Rational>) {
    return r;
  } else {
    return r.template convert_to<Scalar>();
  }
}

void check_capacity(int q, int limit) {
  if (q > limit) {
    throw CapacityError("exact enumeration is capped at " +
                        std::to_string(limit) + " players, got " +
                        std::to_string(q));
  }
  if (q < 1) throw ConfigError("game needs at least one player");
}

void check_player(int q, int j) {
  if (j < 0 || j >= q) {
    throw ConfigError("player " + std::to_string(j) + " outside [0, " +
                      std::to_string(q) + ")");
  }
}

template <typename Scalar>
int geo_of(const ValueFunction<Scalar>& v) {
  if (!v.geo_player) throw ConfigError("game has no GEO player designated");
  return *v.geo_player;
}

// Weights indexed by coalition size.
template <typename Scalar, typename WeightFn>
std::vector<Scalar> weight_table(int q, int max_s, WeightFn fn) {
  std::vector<Scalar> out;
  for (int s = 0; s <= max_s; ++s) out.push_back(convert<Scalar>(fn(q, s)));
  return out;
}

// Sum over coalitions S excluding the `excluded` players of
// weight[|S|] * term(S).
template <typename Scalar, typename Term>
Scalar weighted_sum(int q, std::uint32_t excluded,
                    const std::vector<Scalar>& weights, Term term) {
  Scalar total = 0;
  const std::uint32_t count = 1u << q;
  for (std::uint32_t s = 0; s < count; ++s) {
    if (s & excluded) continue;
    total += weights[std::popcount(s)] * term(s);
  }
  return total;
}

}  // namespace

template <typename Scalar>
ValueFunction<Scalar> ValueFunction<Scalar>::tabulate(
    int q, const std::function<Scalar(std::uint32_t)>& fn,
    std::optional<int> geo_player) {
  check_capacity(q, kMaxShapleyPlayers);
  if (geo_player) check_player(q, *geo_player);
  ValueFunction out;
  out.q = q;
  out.geo_player = geo_player;
  out.values.reserve(std::size_t{1} << q);
  for (std::uint32_t s = 0; s < (1u << q); ++s) out.values.push_back(fn(s));
  return out;
}

template <typename Scalar>
ValueFunction<Scalar> reduce_joint_game(
    int p, const std::vector<int>& geo_set,
    const std::function<Scalar(std::uint32_t)>& raw_value) {
  std::uint32_t geo_mask = 0;
  for (int idx : geo_set) {
    check_player(p, idx);
    geo_mask |= 1u << idx;
  }
  std::vector<int> others;
  for (int i = 0; i < p; ++i) {
    if (!(geo_mask >> i & 1u)) others.push_back(i);
  }
  const int q = static_cast<int>(others.size()) + 1;
  const int geo = q - 1;
  return ValueFunction<Scalar>::tabulate(
      q,
      [&](std::uint32_t eff) {
        std::uint32_t raw = (eff >> geo & 1u) ? geo_mask : 0u;
        for (int k = 0; k < geo; ++k) {
          if (eff >> k & 1u) raw |= 1u << others[k];
        }
        return raw_value(raw);
      },
      geo);
}

Rational shapley_weight(int q, int s) {
  return Rational(factorial(s) * factorial(q - 1 - s), factorial(q));
}

Rational geo_interaction_weight(int q, int s) {
  return Rational(factorial(s) * factorial(q - 2 - s), factorial(q));
}

Rational pairwise_interaction_weight(int q, int s) {
  return Rational(factorial(s) * factorial(q - 2 - s), 2 * factorial(q - 1));
}

template <typename Scalar>
Scalar exact_shapley(const ValueFunction<Scalar>& v, int j) {
  check_capacity(v.q, kMaxShapleyPlayers);
  check_player(v.q, j);
  const auto weights = weight_table<Scalar>(v.q, v.q - 1, shapley_weight);
  const std::uint32_t bit = 1u << j;
  return weighted_sum<Scalar>(v.q, bit, weights, [&](std::uint32_t s) {
    return v(s | bit) - v(s);
  });
}

template <typename Scalar>
Scalar exact_joint_geo(const ValueFunction<Scalar>& v) {
  return exact_shapley(v, geo_of(v));
}

template <typename Scalar>
Scalar exact_geo_feature(const ValueFunction<Scalar>& v, int j) {
  if (j == geo_of(v)) throw ConfigError("feature index refers to GEO");
  return exact_shapley(v, j);
}

template <typename Scalar>
Scalar exact_geo_interaction(const ValueFunction<Scalar>& v, int j) {
  check_capacity(v.q, kMaxInteractionPlayers);
  const int geo = geo_of(v);
  check_player(v.q, j);
  if (j == geo) throw ConfigError("feature index refers to GEO");
  const auto weights =
      weight_table<Scalar>(v.q, v.q - 2, geo_interaction_weight);
  const std::uint32_t gb = 1u << geo;
  const std::uint32_t jb = 1u << j;
  return weighted_sum<Scalar>(v.q, gb | jb, weights, [&](std::uint32_t s) {
    return v(s | gb | jb) - v(s | gb) - v(s | jb) + v(s);
  });
}

template <typename Scalar>
Scalar exact_pairwise_interaction(const ValueFunction<Scalar>& v, int i, int j) {
  check_capacity(v.q, kMaxInteractionPlayers);
  check_player(v.q, i);
  check_player(v.q, j);
  if (i == j) throw ConfigError("pairwise interaction needs distinct players");
  const auto weights =
      weight_table<Scalar>(v.q, v.q - 2, pairwise_interaction_weight);
  const std::uint32_t ib = 1u << i;
  const std::uint32_t jb = 1u << j;
  return weighted_sum<Scalar>(v.q, ib | jb, weights, [&](std::uint32_t s) {
    return v(s | ib | jb) - v(s | ib) - v(s | jb) + v(s);
  });
}

#define GEOSHAP_INSTANTIATE_ORACLE(Scalar)                                     \
  template struct ValueFunction<Scalar>;                                       \
  template ValueFunction<Scalar> reduce_joint_game<Scalar>(                    \
      int, const std::vector<int>&,                                            \
      const std::function<Scalar(std::uint32_t)>&);                            \
  template Scalar exact_shapley<Scalar>(const ValueFunction<Scalar>&, int);    \
  template Scalar exact_joint_geo<Scalar>(const ValueFunction<Scalar>&);       \
  template Scalar exact_geo_feature<Scalar>(const ValueFunction<Scalar>&,      \
                                            int);                              \
  template Scalar exact_geo_interaction<Scalar>(const ValueFunction<Scalar>&,  \
                                                int);                          \
  template Scalar exact_pairwise_interaction<Scalar>(                          \
      const ValueFunction<Scalar>&, int, int);

GEOSHAP_INSTANTIATE_ORACLE(double)
GEOSHAP_INSTANTIATE_ORACLE(Rational)

#undef GEOSHAP_INSTANTIATE_ORACLE

}  // namespace geoshap::oracle
