#include "droboost/benchmark.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "droboost/adaboost.hpp"
#include "droboost/data.hpp"

namespace droboost {

int default_thread_count() {
  if (const char* env = std::getenv("DROBOOST_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

namespace {

BenchmarkRun run_once(const Dataset& data, const BenchmarkConfig& config, int k) {
  BenchmarkRun run;
  run.seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));
  auto [train_set, test_set] = split(data, {config.train_size, run.seed, true});

  auto score = [&](std::string name, const Ensemble& ensemble) {
    run.scores.push_back({std::move(name), evaluate(ensemble, train_set), evaluate(ensemble, test_set), ensemble.size()});
  };

  auto ada = train_adaboost(train_set, config.dro.tree, config.adaboost_rounds);
  score("AdaBoost", ada.ensemble);

  auto dro = train(train_set, config.dro);
  run.delta = dro.trace.delta;
  score("DRO-Boosting", dro.ensemble);

  if (config.gradient_boost_baseline) {
    auto gb = train_gradient_boost(train_set, config.dro.loss, config.dro.tree, config.dro.max_iters,
                                   config.dro.stall_tolerance);
    score("GradBoost", gb.ensemble);
  }
  return run;
}

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace

BenchmarkReport run_benchmark(const Dataset& data, const BenchmarkConfig& config) {
  if (config.repetitions < 1) throw std::invalid_argument("benchmark needs at least one repetition");
  config.dro.validate();
  BenchmarkReport report;
  report.runs.resize(static_cast<std::size_t>(config.repetitions));

  const int threads = std::min(config.threads > 0 ? config.threads : default_thread_count(), config.repetitions);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int k = next++; k < config.repetitions; k = next++) {
      try {
        report.runs[static_cast<std::size_t>(k)] = run_once(data, config, k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return report;
}

std::string format_benchmark(const BenchmarkReport& report) {
  std::ostringstream out;
  if (report.runs.empty()) return "";
  const auto& first = report.runs.front();
  out << "repetitions=" << report.runs.size() << " delta=" << first.delta << "\n";

  struct Row {
    const char* label;
    double Metrics::*field;
  };
  const Row rows[] = {
      {"Accuracy P(Y_true = Y_pred)", &Metrics::accuracy},
      {"False Negative Rate P(pred=1 | true=1)", &Metrics::false_negative_rate},
      {"True Positive Rate P(pred=-1 | true=-1)", &Metrics::true_positive_rate},
      {"Average Exponential Loss", &Metrics::average_exp_loss},
  };

  char buf[256];
  std::snprintf(buf, sizeof buf, "%-40s", "");
  out << buf;
  for (const char* set : {"train", "test"}) {
    for (const auto& s : first.scores) {
      std::snprintf(buf, sizeof buf, " %18s", (s.name + "/" + set).c_str());
      out << buf;
    }
  }
  out << '\n';
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%-40s", row.label);
    out << buf;
    for (bool test : {false, true}) {
      for (std::size_t a = 0; a < first.scores.size(); ++a) {
        std::vector<double> xs;
        for (const auto& run : report.runs) {
          const auto& m = test ? run.scores[a].test : run.scores[a].train;
          xs.push_back(m.*(row.field));
        }
        auto s = summarize(xs);
        std::snprintf(buf, sizeof buf, " %10.3f+-%6.3f", s.mean, s.sd);
        out << buf;
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace droboost
