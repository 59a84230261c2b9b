#pragma once

// Baseline trainers: discrete AdaBoost (Freund-Schapire) and plain
// empirical-risk functional gradient boosting.

#include <vector>

#include "droboost/core.hpp"
#include "droboost/learners.hpp"

namespace droboost {

struct AdaBoostResult {
  Ensemble ensemble;
  /// round_weights[t] is the distribution used to fit round t; the final
  /// entry is the distribution after the last completed round.
  std::vector<std::vector<double>> round_weights;
  std::vector<double> errors;
  std::vector<double> steps;
};

/// Coefficient assigned to a learner with zero weighted error.
inline constexpr double kPerfectLearnerStep = 10.0;

/// Each round fits fit_projection to N w_i Y_i, takes
/// alpha = 1/2 log((1 - err) / err), and updates w_i <- w_i exp(-alpha Y_i f(X_i))
/// before renormalizing. Stops after a perfect learner (alpha = 10) or when
/// err >= 1/2. Throws DataError when the labels contain a single class.
AdaBoostResult train_adaboost(const Dataset& data, const TreeConfig& tree, int rounds);

struct GradientBoostResult {
  Ensemble ensemble;
  std::vector<double> losses;  ///< empirical loss after each round, starting at F_0 = 0
};

/// Minimizes (1/N) sum phi(Y_i F(X_i)) by fitting each learner to the
/// negative gradient -phi'(m_i) Y_i and taking the exact step found by a
/// safeguarded Newton iteration on the one-dimensional objective. Stops early
/// when the relative loss decrease falls below `stall_tolerance`.
GradientBoostResult train_gradient_boost(const Dataset& data, LossKind loss, const TreeConfig& tree, int rounds,
                                         double stall_tolerance = 1e-9);

}  // namespace droboost
