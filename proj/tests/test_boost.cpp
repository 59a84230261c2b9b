#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "droboost/adaboost.hpp"
#include "droboost/boost.hpp"
#include "droboost/errors.hpp"
#include "droboost/worstcase.hpp"
#include "test_util.hpp"

using namespace droboost;

namespace {

double fixed_weight_loss(std::span<const double> m, std::span<const double> w, const Loss& loss) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += w[i] * loss.phi(m[i]);
  return s;
}

TrainConfig base_config(double delta, int iters, int depth) {
  TrainConfig c;
  c.radius = RadiusRule::fixed_delta(delta);
  c.max_iters = iters;
  c.tree = TreeConfig{depth, 1};
  return c;
}

}  // namespace

TEST(RobustGradient, Examples) {
  std::vector<double> m(4, 0.0), w(4, 0.25);
  std::vector<int> y{1, -1, -1, 1};
  auto g = robust_gradient(m, y, Loss{LossKind::exponential}, w);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(g[i], -y[i]);

  std::vector<double> concentrated{0.0, 1.0, 0.0, 0.0};
  g = robust_gradient(m, y, Loss{LossKind::logistic}, concentrated);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[2], 0.0);
  EXPECT_EQ(g[3], 0.0);
  EXPECT_NE(g[1], 0.0);

  EXPECT_THROW(robust_gradient(m, y, Loss{}, std::vector<double>(3, 1.0 / 3)), std::invalid_argument);
}

TEST(RobustGradient, MatchesCentralDifference) {
  std::mt19937_64 rng(13);
  for (LossKind kind : {LossKind::exponential, LossKind::logistic}) {
    const Loss loss{kind};
    const std::size_t n = 12;
    auto m = test_support::random_vector(n, rng, -1.5, 1.5);
    std::vector<int> y(n);
    for (auto& v : y) v = rng() % 2 ? 1 : -1;
    auto wc = solve_worst_case(loss_vector(loss, m), 0.2);
    auto g = robust_gradient(m, y, loss, wc.weights);
    const double eps = 1e-5;
    for (int k = 0; k < 10; ++k) {
      // h is a function value vector; margins move by Y_i h_i.
      auto h = test_support::random_vector(n, rng);
      std::vector<double> plus(n), minus(n);
      for (std::size_t i = 0; i < n; ++i) {
        plus[i] = m[i] + eps * y[i] * h[i];
        minus[i] = m[i] - eps * y[i] * h[i];
      }
      double fd = (fixed_weight_loss(plus, wc.weights, loss) - fixed_weight_loss(minus, wc.weights, loss)) / (2 * eps);
      double analytic = inner_product(g, h);
      EXPECT_NEAR(analytic, fd, 1e-4 * std::abs(fd));
    }
  }
}

TEST(RobustGradient, SubgradientInequality) {
  std::mt19937_64 rng(19);
  const Loss loss{LossKind::exponential};
  const double delta = 0.15;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 15;
    auto m = test_support::random_vector(n, rng, -1.0, 1.0);
    std::vector<int> y(n);
    for (auto& v : y) v = rng() % 2 ? 1 : -1;
    auto wc = solve_worst_case(loss_vector(loss, m), delta);
    auto g = robust_gradient(m, y, loss, wc.weights);
    auto h = test_support::random_vector(n, rng, -0.5, 0.5);
    std::vector<double> moved(n);
    for (std::size_t i = 0; i < n; ++i) moved[i] = m[i] + y[i] * h[i];
    double lhs = robust_loss(moved, loss, delta) - wc.objective;
    EXPECT_GE(lhs, inner_product(g, h) - 1e-8);
  }
}

TEST(MinimizeStep, GridArgmin) {
  LineSearchConfig config;
  for (double c : {0.01, 0.37, 1.0, 4.2, 55.0}) {
    auto f = [c](double a) { return std::cosh(a - c) + 0.1 * (a - c) * (a - c); };
    double alpha = minimize_step(f, {}, config);
    // Dense grid over [0, 2c + 1].
    double best = 0.0, best_f = f(0.0);
    const int steps = 200000;
    for (int k = 1; k <= steps; ++k) {
      double a = (2 * c + 1) * k / steps;
      if (f(a) < best_f) {
        best_f = f(a);
        best = a;
      }
    }
    EXPECT_NEAR(alpha, best, config.tolerance + (2 * c + 1) / steps);
  }
}

TEST(MinimizeStep, IncreasingObjectiveGivesZero) {
  auto f = [](double a) { return a * a + a; };
  EXPECT_LT(minimize_step(f, {}, LineSearchConfig{}), 1e-3);
}

TEST(MinimizeStep, OverflowCountsAsInfinity) {
  auto f = [](double a) {
    if (a > 3.0) throw OutOfRangeError("too far");
    return (a - 2.0) * (a - 2.0);
  };
  EXPECT_NEAR(minimize_step(f, {}, LineSearchConfig{}), 2.0, 1e-6);
}

TEST(LineSearch, AdaBoostClosedForm) {
  std::mt19937_64 rng(2);
  const std::size_t n = 40;
  for (int k = 0; k < 10; ++k) {
    auto w = test_support::random_vector(n, rng, 0.1, 1.0);
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    std::vector<double> z(n);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = rng() % 10 < 3 ? -1.0 : 1.0;
      if (z[i] < 0) err += w[i];
    }
    std::vector<double> m(n, 0.0);
    LineSearchConfig config;
    config.mode = LineSearchMode::fixed_weights;
    double alpha = line_search(m, z, Loss{}, 0.0, w, config);
    EXPECT_NEAR(alpha, 0.5 * std::log((1 - err) / err), 1e-4);
    EXPECT_NEAR(alpha, 0.5 * std::log((1 - err) / err), 1e-12);
  }
}

TEST(LineSearch, UncorrelatedDirectionGivesZero) {
  // Uniform weights at zero margin: half the points agree with the learner.
  std::vector<double> m(4, 0.0), w(4, 0.25), z{1.0, -1.0, 1.0, -1.0};
  for (LineSearchMode mode : {LineSearchMode::fixed_weights, LineSearchMode::exact_robust}) {
    LineSearchConfig config;
    config.mode = mode;
    EXPECT_LT(std::abs(line_search(m, z, Loss{}, 0.0, w, config)), 1e-4);
  }
}

TEST(LineSearch, ExactRobustDecreasesRobustLoss) {
  std::mt19937_64 rng(77);
  const Loss loss{LossKind::logistic};
  const std::size_t n = 25;
  for (int k = 0; k < 10; ++k) {
    auto m = test_support::random_vector(n, rng, -1.0, 1.0);
    std::vector<double> z(n);
    for (auto& v : z) v = rng() % 3 ? 1.0 : -1.0;
    const double delta = 0.1;
    auto wc = solve_worst_case(loss_vector(loss, m), delta);
    double alpha = line_search(m, z, loss, delta, wc.weights, LineSearchConfig{});
    std::vector<double> moved(n);
    for (std::size_t i = 0; i < n; ++i) moved[i] = m[i] + alpha * z[i];
    double at_alpha = robust_loss(moved, loss, delta);
    EXPECT_LE(at_alpha, wc.objective + 1e-15);
    for (double other : {0.5 * alpha, 2.0 * alpha + 1e-3, alpha + 1e-3}) {
      for (std::size_t i = 0; i < n; ++i) moved[i] = m[i] + other * z[i];
      EXPECT_LE(at_alpha, robust_loss(moved, loss, delta) + 1e-12);
    }
  }
}

TEST(Train, ZeroIterations) {
  auto data = test_support::synthetic_dataset(30, 2, 3);
  auto result = train(data, base_config(0.1, 0, 2));
  EXPECT_EQ(result.ensemble.size(), 0u);
  ASSERT_EQ(result.trace.records.size(), 1u);
  EXPECT_DOUBLE_EQ(result.trace.records[0].robust_loss, 1.0);
  EXPECT_DOUBLE_EQ(result.trace.records[0].empirical_loss, 1.0);
}

TEST(Train, ZeroRadiusIsGradientBoosting) {
  auto data = test_support::synthetic_dataset(80, 3, 21);
  for (LossKind kind : {LossKind::exponential, LossKind::logistic}) {
    auto config = base_config(0.0, 15, 2);
    config.loss = kind;
    auto dro = train(data, config);
    auto plain = train_gradient_boost(data, kind, config.tree, 15, config.stall_tolerance);
    ASSERT_EQ(dro.ensemble.size(), plain.ensemble.size());
    for (std::size_t t = 0; t < dro.ensemble.size(); ++t) {
      EXPECT_EQ(dro.ensemble.terms()[t].learner, plain.ensemble.terms()[t].learner);
      EXPECT_NEAR(dro.ensemble.terms()[t].coefficient, plain.ensemble.terms()[t].coefficient, 1e-8);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      EXPECT_EQ(dro.ensemble.predict_label(data.row(i)), plain.ensemble.predict_label(data.row(i)));
    }
  }
}

TEST(Train, DescentAndDominance) {
  auto data = test_support::synthetic_dataset(120, 4, 8);
  auto config = base_config(0.1, 25, 3);
  auto result = train(data, config);
  const auto& rec = result.trace.records;
  ASSERT_GE(rec.size(), 2u);
  for (std::size_t t = 0; t < rec.size(); ++t) {
    EXPECT_GE(rec[t].robust_loss, rec[t].empirical_loss - 1e-12);
    if (t > 0) EXPECT_LE(rec[t].robust_loss, rec[t - 1].robust_loss + config.stall_tolerance * std::max(1.0, rec[t - 1].robust_loss));
    if (t > 0) EXPECT_NEAR(rec[t].achieved_kl, 0.1, 1e-8);
    EXPECT_EQ(rec[t].iteration, static_cast<int>(t));
  }
  EXPECT_EQ(result.ensemble.size() + 1, rec.size());
  // The recorded robust loss is the worst case of the final ensemble.
  auto m = evaluate_margins(result.ensemble, data);
  EXPECT_NEAR(robust_loss(m, Loss{}, 0.1), rec.back().robust_loss, 1e-12);
}

TEST(Train, CalibratedRadius) {
  auto data = test_support::synthetic_dataset(100, 3, 4);
  TrainConfig config;
  config.radius = RadiusRule::calibrated_delta(0.9, 2);
  config.max_iters = 3;
  config.tree = TreeConfig{2, 1};
  auto result = train(data, config);
  EXPECT_NEAR(result.trace.delta, 4.605170185988092 / 200.0, 1e-10);
}

TEST(Train, Deterministic) {
  auto data = test_support::synthetic_dataset(100, 3, 6);
  auto config = base_config(0.2, 10, 3);
  auto a = train(data, config);
  auto b = train(data, config);
  EXPECT_EQ(a.ensemble, b.ensemble);
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t t = 0; t < a.trace.records.size(); ++t) {
    EXPECT_EQ(a.trace.records[t].robust_loss, b.trace.records[t].robust_loss);
    EXPECT_EQ(a.trace.records[t].weights, b.trace.records[t].weights);
    EXPECT_EQ(a.trace.records[t].step, b.trace.records[t].step);
  }
}

TEST(Train, FixedWeightsModeDescendsOnFrozenWeights) {
  // Only the frozen-weight objective is guaranteed to drop in this mode; the
  // robust loss itself may rise.
  auto data = test_support::synthetic_dataset(100, 3, 10);
  auto config = base_config(0.1, 10, 2);
  config.line_search.mode = LineSearchMode::fixed_weights;
  config.loss = LossKind::logistic;
  auto result = train(data, config);
  ASSERT_GT(result.ensemble.size(), 0u);
  const Loss loss{LossKind::logistic};
  Ensemble prefix(data.n_features());
  for (std::size_t t = 0; t < result.ensemble.size(); ++t) {
    const auto& w = result.trace.records[t].weights;
    auto before = evaluate_margins(prefix, data);
    const auto& term = result.ensemble.terms()[t];
    prefix.append(term.coefficient, term.learner);
    auto after = evaluate_margins(prefix, data);
    double f_before = 0.0, f_after = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      f_before += w[i] * loss.phi(before[i]);
      f_after += w[i] * loss.phi(after[i]);
    }
    EXPECT_LT(f_after, f_before) << "step " << t;
    EXPECT_EQ(result.trace.records[t + 1].step, term.coefficient);
  }
}

TEST(Train, ConfigValidation) {
  auto data = test_support::synthetic_dataset(20, 2, 1);
  auto config = base_config(-0.1, 5, 2);
  EXPECT_THROW(train(data, config), std::invalid_argument);
  config = base_config(0.1, -1, 2);
  EXPECT_THROW(train(data, config), std::invalid_argument);
  config = base_config(0.1, 5, 2);
  config.radius = RadiusRule::adaboost_radius();
  config.loss = LossKind::logistic;
  EXPECT_THROW(train(data, config), std::invalid_argument);
  config = base_config(0.1, 5, 2);
  config.line_search.tolerance = 0.0;
  EXPECT_THROW(train(data, config), std::invalid_argument);
}
