#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoshap/types.hpp"

namespace geoshap {

struct BackgroundSpec {
  enum class Mode { kFull, kSample, kKMeans, kSingleMean, kSingleMedian };

  Mode mode = Mode::kFull;
  int k = 0;
  std::uint64_t seed = 0;

  static BackgroundSpec full() { return {}; }
  static BackgroundSpec sample(int k, std::uint64_t seed) {
    return {Mode::kSample, k, seed};
  }
  static BackgroundSpec kmeans(int k, std::uint64_t seed) {
    return {Mode::kKMeans, k, seed};
  }
  static BackgroundSpec single_mean() { return {Mode::kSingleMean, 1, 0}; }
  static BackgroundSpec single_median() { return {Mode::kSingleMedian, 1, 0}; }

  // Accepts "full", "sample:K:SEED", "kmeans:K:SEED", "single:mean",
  // "single:median". The seed is optional and defaults to 0.
  static BackgroundSpec parse(const std::string& text);
  std::string to_string() const;
};

BackgroundData select_background(const Matrix& x, const BackgroundSpec& spec);

struct KMeansResult {
  Matrix centroids;              // k x p
  std::vector<int> assignment;   // n
  std::vector<int> cluster_sizes;
  // Within-cluster sum of squares after each assignment step.
  std::vector<double> inertia_history;
  int iterations = 0;

  double inertia() const {
    return inertia_history.empty() ? 0.0 : inertia_history.back();
  }
};

// Lloyd's algorithm with k-means++ seeding on raw (unstandardized) features.
// Stops when no centroid moves more than tol or after max_iter iterations.
// Empty clusters are reseeded from the point farthest from its centroid.
KMeansResult kmeans(const Matrix& x, int k, std::uint64_t seed,
                    int max_iter = 100, double tol = 1e-6);

}  // namespace geoshap
