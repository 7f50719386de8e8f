#include "geoshap/coalition.hpp"

#include <string>

#include "geoshap/errors.hpp"

namespace geoshap {
namespace {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    // Exact at every step: result * (n - k + i) is divisible by i.
    result = result * static_cast<std::uint64_t>(n - k + i) /
             static_cast<std::uint64_t>(i);
  }
  return result;
}

void check_instance(const Vector& instance, const GeoSpec& spec) {
  if (instance.size() != spec.p()) {
    throw DataError("instance has " + std::to_string(instance.size()) +
                    " values, expected " + std::to_string(spec.p()));
  }
}

}  // namespace

std::vector<Coalition> enumerate_coalitions(int q) {
  if (q > kMaxPlayers) {
    throw CapacityError("coalition enumeration is capped at " +
                        std::to_string(kMaxPlayers) + " effective players, got " +
                        std::to_string(q));
  }
  if (q < 1) throw ConfigError("player count must be positive");
  const std::uint32_t count = 1u << q;
  std::vector<Coalition> out;
  out.reserve(count);
  for (std::uint32_t bits = 0; bits < count; ++bits) {
    out.push_back(Coalition{bits, q});
  }
  return out;
}

KernelWeight kernel_weight(int q, int s) {
  if (s < 0 || s > q) {
    throw ConfigError("coalition size " + std::to_string(s) +
                      " outside [0, " + std::to_string(q) + "]");
  }
  if (s == 0 || s == q) return {0.0, true};
  const double denom = static_cast<double>(binomial(q, s)) *
                       static_cast<double>(s) * static_cast<double>(q - s);
  return {static_cast<double>(q - 1) / denom, false};
}

DesignSystem build_design_matrix(const std::vector<Coalition>& coalitions,
                                 bool with_interactions) {
  if (coalitions.empty()) throw ConfigError("no coalitions supplied");
  DesignSystem sys;
  sys.q = coalitions.front().q;
  sys.with_interactions = with_interactions;
  sys.coalitions = coalitions;
  const int k = sys.num_features();
  const int cols = with_interactions ? 2 * k + 2 : k + 2;
  const auto rows = static_cast<Eigen::Index>(coalitions.size());
  sys.z = Matrix::Zero(rows, cols);
  sys.weights.reserve(coalitions.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Coalition& c = coalitions[r];
    if (c.q != sys.q) throw ConfigError("coalitions disagree on player count");
    const bool geo = c.has_geo();
    for (int j = 0; j < k; ++j) {
      if (!c.has(j)) continue;
      sys.z(r, sys.main_column(j)) = 1.0;
      if (with_interactions && geo) sys.z(r, sys.interaction_column(j)) = 1.0;
    }
    if (geo) sys.z(r, sys.geo_column()) = 1.0;
    sys.z(r, sys.intercept_column()) = 1.0;
    sys.weights.push_back(kernel_weight(sys.q, c.size()));
  }
  return sys;
}

DesignSystem build_design_matrix(const std::vector<Coalition>& coalitions,
                                 const GeoSpec& spec, bool with_interactions) {
  if (!coalitions.empty() && coalitions.front().q != spec.q()) {
    throw ConfigError("coalitions have " + std::to_string(coalitions.front().q) +
                      " players but the location spec implies " +
                      std::to_string(spec.q()));
  }
  return build_design_matrix(coalitions, with_interactions);
}

void write_masked_block(const Vector& instance, const Coalition& coalition,
                        const GeoSpec& spec, const BackgroundData& background,
                        Eigen::Ref<Matrix> out) {
  out = background.rows;
  const auto& owner = spec.player_of_column();
  for (int c = 0; c < spec.p(); ++c) {
    if (coalition.has(owner[c])) out.col(c).setConstant(instance[c]);
  }
}

Matrix synthesize_masked_samples(const Vector& instance,
                                 const Coalition& coalition,
                                 const GeoSpec& spec,
                                 const BackgroundData& background) {
  check_instance(instance, spec);
  if (coalition.q != spec.q()) {
    throw DataError("coalition has " + std::to_string(coalition.q) +
                    " players, expected " + std::to_string(spec.q()));
  }
  if (background.rows.cols() != spec.p()) {
    throw DataError("background has " + std::to_string(background.rows.cols()) +
                    " columns, expected " + std::to_string(spec.p()));
  }
  Matrix out(background.rows.rows(), spec.p());
  write_masked_block(instance, coalition, spec, background, out);
  return out;
}

double coalition_value(const Predictor& predictor, const Vector& instance,
                       const Coalition& coalition, const GeoSpec& spec,
                       const BackgroundData& background) {
  const Matrix samples =
      synthesize_masked_samples(instance, coalition, spec, background);
  try {
    return checked_predict(predictor, samples).dot(background.row_weights);
  } catch (const PredictorError& e) {
    throw PredictorError("coalition " + std::to_string(coalition.bits) + ": " +
                         e.what());
  }
}

}  // namespace geoshap
