#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "geoshap/errors.hpp"

namespace geoshap::detail {

// Seed derivation for independent per-task generators.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct TaskFailure {
  bool failed = false;
  ErrorCategory category = ErrorCategory::kNumerical;
  std::string message;
};

[[noreturn]] inline void throw_as(ErrorCategory category,
                                  const std::string& message) {
  switch (category) {
    case ErrorCategory::kConfig:
      throw ConfigError(message);
    case ErrorCategory::kData:
      throw DataError(message);
    case ErrorCategory::kPredictor:
      throw PredictorError(message);
    case ErrorCategory::kNumerical:
      break;
  }
  throw NumericalError(message);
}

// Runs fn(i) for i in [0, n) on `workers` threads. Indices are claimed in
// ascending order, so when stop_on_failure is set every index below the first
// failure still runs and the lowest failing index is deterministic.
template <typename Fn>
std::vector<TaskFailure> parallel_for(std::size_t n, int workers, Fn&& fn,
                                      bool stop_on_failure) {
  std::vector<TaskFailure> failures(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto run = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (const Error& e) {
        failures[i] = {true, e.category(), e.what()};
      } catch (const std::exception& e) {
        failures[i] = {true, ErrorCategory::kNumerical, e.what()};
      }
      if (failures[i].failed && stop_on_failure) stop.store(true);
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || n <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(std::min(threads, n));
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
  }
  return failures;
}

}  // namespace geoshap::detail
