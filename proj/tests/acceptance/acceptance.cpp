// Acceptance checks. One PASS/FAIL/SKIP line per criterion; the exit status
// is nonzero when any criterion fails.
//
//   acceptance                run every criterion
//   acceptance --only <name>  run one criterion; exits 77 when it is skipped

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "droboost/adaboost.hpp"
#include "droboost/benchmark.hpp"
#include "droboost/boost.hpp"
#include "droboost/calibrate.hpp"
#include "droboost/data.hpp"
#include "droboost/worstcase.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace droboost;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::fail;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

// Robust boosting with the per-round AdaBoost radius against discrete AdaBoost.
Outcome adaboost_recovery() {
  auto data = test_support::synthetic_dataset(50, 2, 2024, 0.15);
  Stopwatch clock;
  auto ada = train_adaboost(data, TreeConfig{1, 1}, 10);
  TrainConfig config;
  config.radius = RadiusRule::adaboost_radius();
  config.loss = LossKind::exponential;
  config.tree = TreeConfig{1, 1};
  config.max_iters = 10;
  auto dro = train(data, config);
  double elapsed = clock.seconds();

  bool same_learners = ada.ensemble.size() == 10 && dro.ensemble.size() == 10;
  double worst = 0.0;
  for (std::size_t t = 0; same_learners && t < 10; ++t) {
    same_learners = dro.ensemble.terms()[t].learner == ada.ensemble.terms()[t].learner;
    // Distribution used to fit round t.
    for (std::size_t i = 0; i < data.size(); ++i) {
      worst = std::max(worst, std::abs(dro.trace.records[t].weights[i] - ada.round_weights[t][i]));
    }
  }
  return verdict(same_learners && worst < 1e-10 && elapsed < 1.0,
                 fmt("10 rounds, same learners=%s, max |w_dro - w_ada| = %.3g, %.3f s", same_learners ? "yes" : "no",
                     worst, elapsed));
}

Outcome worst_case_optimality() {
  Stopwatch clock;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> loss_dist(-3.0, 3.0);
  std::uniform_real_distribution<double> delta_dist(0.0, 0.5);
  double worst_gap = 0.0, worst_grid = 0.0, worst_kl = 0.0;
  for (int k = 0; k < 200; ++k) {
    std::size_t n = 2 + static_cast<std::size_t>(k % 3);
    std::vector<double> losses(n);
    for (auto& l : losses) l = loss_dist(rng);
    double delta = 0.0;
    while (delta == 0.0) delta = 0.5 - delta_dist(rng);  // (0, 0.5]
    auto wc = solve_worst_case(losses, delta);
    auto oracle = test_support::boundary_search(losses, delta, n == 4 ? 20 : 50);
    double grid = test_support::grid_feasible_max(losses, delta, n == 4 ? 40 : (n == 3 ? 200 : 2000));
    worst_gap = std::max(worst_gap, std::abs(wc.objective - oracle.objective));
    worst_grid = std::max(worst_grid, grid - wc.objective);
    worst_kl = std::max(worst_kl, std::abs(kl_divergence(wc.weights) - delta));
  }
  double elapsed = clock.seconds();
  return verdict(worst_gap < 1e-6 && worst_grid < 1e-6 && worst_kl < 1e-8 && elapsed < 30.0,
                 fmt("200 instances, max |obj - oracle| = %.3g, max grid excess = %.3g, max |KL - delta| = %.3g, %.2f s",
                     worst_gap, worst_grid, worst_kl, elapsed));
}

Outcome psi_identity_and_monotonicity() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst_identity = 0.0;
  for (int k = 0; k < 100; ++k) {
    std::size_t n = 2 + rng() % 30;
    auto losses = test_support::random_vector(n, rng, -4.0, 4.0);
    double top = *std::max_element(losses.begin(), losses.end());
    double beta = -top - std::exp(-8.0 + 14.0 * unif(rng));
    double delta = 0.5 * unif(rng);
    double lhs = psi(beta, losses, delta);
    double rhs = delta - test_support::direct_kl(dual_weights(beta, losses));
    worst_identity = std::max(worst_identity, std::abs(lhs - rhs));
  }

  int monotone = 0, single_root = 0, decreasing = 0;
  for (int k = 0; k < 100; ++k) {
    std::size_t n = 2 + rng() % 30;
    auto losses = test_support::random_vector(n, rng, -4.0, 4.0);
    double top = *std::max_element(losses.begin(), losses.end());
    double bottom = *std::min_element(losses.begin(), losses.end());
    double spread = std::max(1.0, top - bottom);
    double delta = 0.01 + 0.49 * unif(rng);
    // beta runs from far below the domain edge up to 1e-9 * spread from it.
    std::vector<double> values;
    for (int g = 0; g <= 600; ++g) {
      double gap = spread * std::pow(10.0, 3.0 - 12.0 * g / 600.0);
      values.push_back(psi(-top - gap, losses, delta));
    }
    bool inc = true, dec = true;
    int sign_changes = 0;
    for (std::size_t g = 1; g < values.size(); ++g) {
      if (!(values[g] > values[g - 1])) inc = false;
      if (!(values[g] < values[g - 1])) dec = false;
      if ((values[g] > 0.0) != (values[g - 1] > 0.0)) ++sign_changes;
    }
    if (inc || dec) ++monotone;
    if (dec) ++decreasing;
    if (sign_changes == 1) ++single_root;
  }
  return verdict(worst_identity < 1e-10 && monotone == 100 && single_root == 100,
                 fmt("identity max error %.3g on 100 points; strictly monotone %d/100 (decreasing in beta: %d), "
                     "one sign change %d/100",
                     worst_identity, monotone, decreasing, single_root));
}

double chi2_reference_cdf(int dof, double x) {
  if (x <= 0.0) return 0.0;
  return dof == 1 ? std::erf(std::sqrt(0.5 * x)) : 1.0 - std::exp(-0.5 * x);
}

Outcome likelihood_calibration() {
  Stopwatch clock;
  const std::size_t n = 1000;
  const int reps = 2000;
  const double reference_q[] = {0.0, 2.705543454095404, 4.605170185988092};
  std::string detail;
  bool ok = true;
  for (int dof : {1, 2}) {
    std::mt19937_64 rng(1000 + dof);
    std::normal_distribution<double> normal;
    std::vector<double> stats(reps), moments(n * dof);
    for (int r = 0; r < reps; ++r) {
      for (auto& v : moments) v = normal(rng);
      stats[r] = 2.0 * static_cast<double>(n) * epl_value(moments, dof).value;
    }
    std::sort(stats.begin(), stats.end());
    double ks = 0.0;
    for (int r = 0; r < reps; ++r) {
      double f = chi2_reference_cdf(dof, stats[r]);
      ks = std::max({ks, std::abs(f - static_cast<double>(r) / reps), std::abs(f - static_cast<double>(r + 1) / reps)});
    }
    double q = stats[static_cast<std::size_t>(0.9 * reps)];
    double rel = std::abs(q - reference_q[dof]) / reference_q[dof];
    ok = ok && ks < 0.05 && rel < 0.10;
    detail += fmt("T=%d KS=%.4f q90=%.4f (rel err %.3f); ", dof, ks, q, rel);
  }
  double elapsed = clock.seconds();
  ok = ok && elapsed < 120.0;
  detail += fmt("N=1000, 2000 reps, %.1f s", elapsed);
  return verdict(ok, detail);
}

Outcome chi2_quantile_accuracy() {
  double worst = 0.0;
  for (int k = 1; k < 1000; ++k) {
    double p = k / 1000.0;
    worst = std::max(worst, std::abs(chi2_quantile(2, p) + 2.0 * std::log1p(-p)));
  }
  std::mt19937_64 rng(31337);
  std::normal_distribution<double> normal;
  const int draws = 1'000'000;
  std::vector<double> s(draws);
  for (auto& v : s) {
    double acc = 0.0;
    for (int j = 0; j < 30; ++j) {
      double z = normal(rng);
      acc += z * z;
    }
    v = acc;
  }
  std::nth_element(s.begin(), s.begin() + draws * 9 / 10, s.end());
  double mc = s[draws * 9 / 10];
  double q = chi2_quantile(30, 0.9);
  double rel = std::abs(q - mc) / mc;
  return verdict(worst < 1e-9 && rel < 0.005,
                 fmt("T=2 closed form max error %.3g on 999 p values; T=30 p=0.9: %.6f vs Monte-Carlo %.6f (rel %.4f)",
                     worst, q, mc, rel));
}

Outcome descent() {
  Stopwatch clock;
  int violations = 0, problems = 0;
  std::size_t total_steps = 0;
  double worst_rise = 0.0;
  for (int k = 0; k < 20; ++k) {
    auto data = test_support::synthetic_dataset(200, 5, 500 + k, 0.05 + 0.01 * k);
    TrainConfig config;
    config.radius = RadiusRule::fixed_delta(0.02 + 0.02 * k);
    config.loss = k % 2 ? LossKind::logistic : LossKind::exponential;
    config.tree = TreeConfig{3, 1};
    config.max_iters = 30;
    config.line_search.mode = LineSearchMode::exact_robust;
    auto result = train(data, config);
    const auto& rec = result.trace.records;
    ++problems;
    for (std::size_t t = 1; t < rec.size(); ++t) {
      ++total_steps;
      double allowed = config.stall_tolerance * std::max(1.0, std::abs(rec[t - 1].robust_loss));
      double rise = rec[t].robust_loss - rec[t - 1].robust_loss;
      worst_rise = std::max(worst_rise, rise);
      if (rise > allowed) ++violations;
    }
  }
  return verdict(violations == 0 && problems == 20,
                 fmt("20 problems, %zu steps, %d increases beyond tolerance, largest change %.3g, %.1f s", total_steps,
                     violations, worst_rise, clock.seconds()));
}

Outcome zero_radius_reduction() {
  auto data = test_support::synthetic_dataset(300, 4, 4242);
  auto holdout = test_support::synthetic_dataset(1000, 4, 4243);
  std::size_t mismatched_learners = 0, mismatched_predictions = 0, terms = 0;
  double worst_coef = 0.0;
  for (LossKind kind : {LossKind::exponential, LossKind::logistic}) {
    TrainConfig config;
    config.radius = RadiusRule::fixed_delta(0.0);
    config.loss = kind;
    config.tree = TreeConfig{3, 1};
    config.max_iters = 30;
    config.seed = 7;
    auto dro = train(data, config);
    auto plain = train_gradient_boost(data, kind, config.tree, config.max_iters, config.stall_tolerance);
    if (dro.ensemble.size() != plain.ensemble.size()) return verdict(false, "ensemble sizes differ");
    terms += dro.ensemble.size();
    for (std::size_t t = 0; t < dro.ensemble.size(); ++t) {
      if (!(dro.ensemble.terms()[t].learner == plain.ensemble.terms()[t].learner)) ++mismatched_learners;
      worst_coef = std::max(worst_coef, std::abs(dro.ensemble.terms()[t].coefficient - plain.ensemble.terms()[t].coefficient));
    }
    for (const Dataset* d : {&data, &holdout}) {
      for (std::size_t i = 0; i < d->size(); ++i) {
        if (dro.ensemble.predict_label(d->row(i)) != plain.ensemble.predict_label(d->row(i))) ++mismatched_predictions;
      }
    }
  }
  return verdict(mismatched_learners == 0 && mismatched_predictions == 0,
                 fmt("%zu terms, %zu learner mismatches, %zu prediction mismatches over 2600 points, max step diff %.3g",
                     terms, mismatched_learners, mismatched_predictions, worst_coef));
}

std::filesystem::path uci_path() {
  if (const char* env = std::getenv("DROBOOST_UCI_CSV")) return env;
  return std::filesystem::path(DROBOOST_SOURCE_DIR) / "data" / "default_of_credit_card_clients.csv";
}

Outcome credit_default_reproduction() {
  auto path = uci_path();
  if (!std::filesystem::exists(path)) {
    return {Status::skip, "credit-default CSV not found at " + path.string() + " (set DROBOOST_UCI_CSV)"};
  }
  int skip_rows = 2;
  if (const char* env = std::getenv("DROBOOST_UCI_SKIP_ROWS")) skip_rows = std::atoi(env);
  Stopwatch clock;
  Dataset data = load_csv(path, UciCreditSchema{}, CsvOptions{skip_rows});
  BenchmarkConfig config;
  config.train_size = 3000;
  config.repetitions = 10;
  config.seed = 2019;
  config.dro.radius = RadiusRule::calibrated_delta(0.9, 30);
  config.dro.loss = LossKind::exponential;
  config.dro.tree = TreeConfig{5, 1};
  config.dro.max_iters = 100;
  config.adaboost_rounds = 100;
  auto report = run_benchmark(data, config);
  int wins = 0;
  double acc_dro = 0.0, acc_ada = 0.0;
  for (const auto& run : report.runs) {
    const auto& ada = run.scores[0].test;
    const auto& dro = run.scores[1].test;
    if (dro.average_exp_loss <= ada.average_exp_loss) ++wins;
    acc_dro += dro.accuracy / report.runs.size();
    acc_ada += ada.accuracy / report.runs.size();
  }
  double elapsed = clock.seconds();
  return verdict(wins >= 8 && acc_dro > acc_ada && elapsed < 1800.0,
                 fmt("N=%zu (%zu defaults); test exp loss DRO <= AdaBoost in %d/10; mean test accuracy %.4f vs %.4f; "
                     "%.0f s",
                     data.size(), data.count_label(1), wins, acc_dro, acc_ada, elapsed));
}

struct Criterion {
  const char* name;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"adaboost", "AdaBoost recovery with the per-round radius", adaboost_recovery},
      {"worstcase", "Worst-case solver optimality", worst_case_optimality},
      {"psi", "Dual function identity and monotonicity", psi_identity_and_monotonicity},
      {"likelihood", "Empirical-likelihood chi-square calibration", likelihood_calibration},
      {"chi2", "chi2_quantile accuracy", chi2_quantile_accuracy},
      {"descent", "Robust-loss descent", descent},
      {"zero-radius", "Zero radius reduces to gradient boosting", zero_radius_reduction},
      {"credit-default", "Credit-default comparison against AdaBoost", credit_default_reproduction},
  };

  std::string only;
  if (argc == 3 && std::string(argv[1]) == "--only") only = argv[2];
  else if (argc != 1) {
    std::fprintf(stderr, "usage: %s [--only <name>]\n", argv[0]);
    return 2;
  }

  int failures = 0, ran = 0, skipped = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && only != c.name) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::skip ? "SKIP" : "FAIL";
    std::printf("%s  [%s] %s: %s\n", tag, c.name, c.title, o.detail.c_str());
    std::fflush(stdout);
    if (o.status == Status::fail) ++failures;
    if (o.status == Status::skip) ++skipped;
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
    return 2;
  }
  if (failures > 0) return 1;
  if (!only.empty() && skipped == ran) return 77;
  return 0;
}
