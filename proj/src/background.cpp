#include "geoshap/background.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "geoshap/errors.hpp"
#include "geoshap/io.hpp"

namespace geoshap {
namespace {

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto value = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("invalid background seed: " + text);
  }
}

int parse_count(const std::string& text) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(text, &used);
    if (used != text.size() || value < 1) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("invalid background size: " + text);
  }
}

double squared_distance(const Matrix& a, Eigen::Index i, const Matrix& b,
                        Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

Matrix kmeans_plus_plus(const Matrix& x, int k, std::mt19937_64& gen) {
  const auto n = x.rows();
  Matrix centroids(k, x.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = x.row(first(gen));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = squared_distance(x, i, centroids, 0);

  for (int c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::discrete_distribution<Eigen::Index> dist(d2.begin(), d2.end());
      pick = dist(gen);
    } else {
      // Every point coincides with a chosen centroid.
      pick = first(gen);
    }
    centroids.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(x, i, centroids, c));
    }
  }
  return centroids;
}

}  // namespace

BackgroundSpec BackgroundSpec::parse(const std::string& text) {
  const auto parts = split(text, ':');
  const std::string& mode = parts[0];
  if (mode == "full" && parts.size() == 1) return full();
  if (mode == "single" && parts.size() == 2) {
    if (parts[1] == "mean") return single_mean();
    if (parts[1] == "median") return single_median();
  }
  if ((mode == "sample" || mode == "kmeans") &&
      (parts.size() == 2 || parts.size() == 3)) {
    const int k = parse_count(parts[1]);
    const std::uint64_t seed = parts.size() == 3 ? parse_seed(parts[2]) : 0;
    return mode == "sample" ? sample(k, seed) : kmeans(k, seed);
  }
  throw ConfigError("invalid background spec '" + text +
                    "' (expected full, sample:K:SEED, kmeans:K:SEED, "
                    "single:mean or single:median)");
}

std::string BackgroundSpec::to_string() const {
  switch (mode) {
    case Mode::kFull:
      return "full";
    case Mode::kSample:
      return "sample:" + std::to_string(k) + ":" + std::to_string(seed);
    case Mode::kKMeans:
      return "kmeans:" + std::to_string(k) + ":" + std::to_string(seed);
    case Mode::kSingleMean:
      return "single:mean";
    case Mode::kSingleMedian:
      return "single:median";
  }
  return "full";
}

BackgroundData select_background(const Matrix& x, const BackgroundSpec& spec) {
  const auto n = x.rows();
  if (n < 1) throw DataError("cannot build a background from empty data");
  const bool sized = spec.mode == BackgroundSpec::Mode::kSample ||
                     spec.mode == BackgroundSpec::Mode::kKMeans;
  if (sized && (spec.k < 1 || spec.k > n)) {
    throw ConfigError("background size " + std::to_string(spec.k) +
                      " must be in [1, " + std::to_string(n) + "]");
  }

  switch (spec.mode) {
    case BackgroundSpec::Mode::kFull:
      return BackgroundData::uniform(x, spec.to_string());

    case BackgroundSpec::Mode::kSample: {
      std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
      std::iota(all.begin(), all.end(), Eigen::Index{0});
      std::vector<Eigen::Index> chosen;
      std::mt19937_64 gen(spec.seed);
      std::sample(all.begin(), all.end(), std::back_inserter(chosen), spec.k,
                  gen);
      Matrix rows(spec.k, x.cols());
      for (int i = 0; i < spec.k; ++i) rows.row(i) = x.row(chosen[i]);
      return BackgroundData::uniform(std::move(rows), spec.to_string());
    }

    case BackgroundSpec::Mode::kKMeans: {
      const KMeansResult km = kmeans(x, spec.k, spec.seed);
      BackgroundData bg;
      bg.rows = km.centroids;
      bg.row_weights.resize(spec.k);
      for (int c = 0; c < spec.k; ++c) {
        bg.row_weights[c] =
            static_cast<double>(km.cluster_sizes[c]) / static_cast<double>(n);
      }
      bg.descriptor = spec.to_string();
      return bg;
    }

    case BackgroundSpec::Mode::kSingleMean: {
      Matrix row = x.colwise().mean();
      return BackgroundData::uniform(std::move(row), spec.to_string());
    }

    case BackgroundSpec::Mode::kSingleMedian: {
      Matrix row(1, x.cols());
      std::vector<double> col(static_cast<std::size_t>(n));
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        for (Eigen::Index i = 0; i < n; ++i) col[i] = x(i, c);
        const auto mid = col.begin() + (n - 1) / 2;
        std::nth_element(col.begin(), mid, col.end());
        row(0, c) = *mid;
      }
      return BackgroundData::uniform(std::move(row), spec.to_string());
    }
  }
  throw ConfigError("unknown background mode");
}

KMeansResult kmeans(const Matrix& x, int k, std::uint64_t seed, int max_iter,
                    double tol) {
  const auto n = x.rows();
  if (n < 1) throw DataError("k-means needs at least one point");
  if (k < 1 || k > n) {
    throw ConfigError("k-means cluster count " + std::to_string(k) +
                      " must be in [1, " + std::to_string(n) + "]");
  }
  std::mt19937_64 gen(seed);
  KMeansResult out;
  out.centroids = kmeans_plus_plus(x, k, gen);
  out.assignment.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> dist(static_cast<std::size_t>(n));

  auto assign = [&] {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = squared_distance(x, i, out.centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      out.assignment[i] = best;
      dist[i] = best_d;
      inertia += best_d;
    }
    out.inertia_history.push_back(inertia);
  };

  bool converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    assign();
    out.iterations = iter + 1;
    if (converged) break;

    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<int> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(out.assignment[i]) += x.row(i);
      ++counts[out.assignment[i]];
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      Eigen::RowVectorXd next;
      if (counts[c] > 0) {
        next = sums.row(c) / static_cast<double>(counts[c]);
      } else {
        const auto far = static_cast<Eigen::Index>(
            std::max_element(dist.begin(), dist.end()) - dist.begin());
        next = x.row(far);
        dist[far] = 0.0;
      }
      shift = std::max(shift, (next - out.centroids.row(c)).norm());
      out.centroids.row(c) = next;
    }
    converged = shift < tol;
    if (iter + 1 == max_iter) assign();
  }

  out.cluster_sizes.assign(k, 0);
  for (int a : out.assignment) ++out.cluster_sizes[a];
  return out;
}

}  // namespace geoshap
