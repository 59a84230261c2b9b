#pragma once

// Distributionally robust boosting: functional subgradient descent on
//
//   L_rob(F) = max { sum_i w_i phi(Y_i F(X_i)) : D(w || P_N) <= delta },
//
// alternating worst-case reweighting with weak-learner projection and a line
// search along the fitted learner.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "droboost/calibrate.hpp"
#include "droboost/core.hpp"
#include "droboost/learners.hpp"

namespace droboost {

enum class LineSearchMode {
  exact_robust,   ///< re-solve the worst case at every trial step
  fixed_weights,  ///< minimize sum_i w_i phi(m_i + alpha z_i) with w frozen
};

struct LineSearchConfig {
  LineSearchMode mode = LineSearchMode::exact_robust;
  double tolerance = 1e-6;
  double initial_step = 1e-3;
  int max_expansions = 20;
  int max_evaluations = 100;
};

/// How the KL radius is obtained.
struct RadiusRule {
  enum class Kind {
    fixed,
    /// delta = chi2_quantile(dimension, confidence) / (2 N)
    calibrated,
    /// Per-round radius that makes the worst case over the negated losses
    /// -exp(Y_i F(X_i)) land on the AdaBoost weights (dual root at zero).
    adaboost,
  };
  Kind kind = Kind::fixed;
  double delta = 0.0;
  double confidence = 0.9;
  int dimension = 30;

  static RadiusRule fixed_delta(double delta) { return {Kind::fixed, delta, 0.9, 30}; }
  static RadiusRule calibrated_delta(double confidence, int dimension) {
    return {Kind::calibrated, 0.0, confidence, dimension};
  }
  static RadiusRule adaboost_radius() { return {Kind::adaboost, 0.0, 0.9, 30}; }
};

struct TrainConfig {
  RadiusRule radius;
  LossKind loss = LossKind::exponential;
  TreeConfig tree;
  int max_iters = 100;
  LineSearchConfig line_search;
  /// Relative robust-loss improvement below which training stops.
  double stall_tolerance = 1e-9;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double robust_loss = 0.0;
  double empirical_loss = 0.0;
  double achieved_kl = 0.0;
  std::optional<double> beta_star;
  double delta = 0.0;
  /// Step that produced this iterate (0 for the initial record).
  double step = 0.0;
  std::string learner;
  /// Worst-case weights at this iterate; these drive the next gradient.
  std::vector<double> weights;
};

struct TrainTrace {
  double delta = 0.0;
  std::vector<IterationRecord> records;
};

struct TrainResult {
  Ensemble ensemble;
  TrainTrace trace;
};

/// Representer of the robust subgradient under <.,.>_N with the weights held
/// fixed: g_i = N w_i phi'(m_i) Y_i.
std::vector<double> robust_gradient(std::span<const double> margins, std::span<const int> labels,
                                    const Loss& loss, std::span<const double> weights);

/// Robust loss of the margin vector: objective of the worst case over the KL ball.
double robust_loss(std::span<const double> margins, const Loss& loss, double delta);

/// One-dimensional minimizer of a convex objective on alpha >= 0: the bracket
/// grows by doubling from `initial_step` until the objective rises, then
/// golden-section search runs until the bracket is narrower than `tolerance`
/// or the evaluation budget is spent. When `derivative` is given, the result
/// is polished by a bracketed secant search on its sign change. Non-finite
/// objective values count as +inf.
double minimize_step(const std::function<double(double)>& objective,
                     const std::function<double(double)>& derivative, const LineSearchConfig& config);

/// Step size along `direction` from the iterate with margins `margins`.
/// `direction_margins` holds z_i = Y_i h(X_i); `weights` are the frozen
/// worst-case weights used by LineSearchMode::fixed_weights.
double line_search(std::span<const double> margins, std::span<const double> direction_margins,
                   const Loss& loss, double delta, std::span<const double> weights,
                   const LineSearchConfig& config);

/// Convenience overload evaluating margins from an ensemble and a learner.
double line_search(const Dataset& data, const Ensemble& ensemble, const Tree& direction,
                   std::span<const double> weights, double delta, const TrainConfig& config);

/// The KL radius used by `config` on a dataset of size n (fixed or calibrated).
double resolve_delta(const RadiusRule& rule, std::size_t n);

/// Runs the boosting loop. Solver failures are rethrown as SolverError naming
/// the iteration.
TrainResult train(const Dataset& data, const TrainConfig& config);

}  // namespace droboost
