#pragma once

#include <span>

#include "droboost/core.hpp"

namespace droboost {

struct TreeConfig {
  int max_depth = 5;
  int min_leaf = 1;

  /// Throws std::invalid_argument unless max_depth >= 1 and min_leaf >= 1.
  void validate() const;
};

/// Least-squares projection of `target` onto depth-limited trees with +-1
/// leaves, grown greedily (CART).
///
/// Each leaf predicts the sign of its summed target (sign(0) = +1). With +-1
/// leaves, minimizing sum_i (f(X_i) - target_i)^2 over a split is the same as
/// maximizing |sum_left target| + |sum_right target|. Thresholds sit at
/// midpoints of consecutive distinct feature values; ties in split score go
/// to the smaller (feature, threshold). A node is split only if the split
/// strictly lowers the squared error.
///
/// Throws std::invalid_argument when the target length differs from N,
/// contains non-finite values, or N < 2 * min_leaf.
Tree fit_projection(const Dataset& data, std::span<const double> target, const TreeConfig& config);

/// Deterministic traversal; "go left iff x[feature] <= threshold".
inline double predict(const Tree& learner, std::span<const double> x) { return learner.predict(x); }

}  // namespace droboost
