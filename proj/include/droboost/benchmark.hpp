#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "droboost/boost.hpp"
#include "droboost/metrics.hpp"

namespace droboost {

struct BenchmarkConfig {
  std::size_t train_size = 3000;
  int repetitions = 10;
  std::uint64_t seed = 0;
  /// DRO-Boosting settings; its tree config is shared with every baseline.
  TrainConfig dro;
  int adaboost_rounds = 100;
  /// Adds an empirical-risk gradient boosting column with the same loss.
  bool gradient_boost_baseline = false;
  /// Worker threads over repetitions; 0 reads DROBOOST_THREADS (default 1).
  int threads = 0;
};

struct AlgorithmScore {
  std::string name;
  Metrics train;
  Metrics test;
  std::size_t terms = 0;
};

struct BenchmarkRun {
  std::uint64_t seed = 0;
  double delta = 0.0;
  std::vector<AlgorithmScore> scores;  ///< AdaBoost, DRO-Boosting[, GradBoost]
};

struct BenchmarkReport {
  std::vector<BenchmarkRun> runs;
};

/// Repetition k splits with seed derive_seed(config.seed, k) and trains every
/// algorithm on the same split. Runs are ordered by k whatever the thread count.
BenchmarkReport run_benchmark(const Dataset& data, const BenchmarkConfig& config);

/// Mean +- sample standard deviation over repetitions, one row per metric.
std::string format_benchmark(const BenchmarkReport& report);

int default_thread_count();

}  // namespace droboost
