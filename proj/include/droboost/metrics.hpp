#pragma once

#include <cstddef>
#include <string>

#include "droboost/core.hpp"

namespace droboost {

/// Classification report for y_pred = sgn(F(x)), sgn(0) = +1.
///
/// The rate names follow the reporting convention of the credit-default
/// study: "false negative rate" is P(y_pred = +1 | y_true = +1) and "true
/// positive rate" is P(y_pred = -1 | y_true = -1). Rates conditioned on an
/// absent class are NaN.
struct Metrics {
  std::size_t n = 0;
  std::size_t true_pos = 0;   ///< y_true = +1, y_pred = +1
  std::size_t false_neg = 0;  ///< y_true = +1, y_pred = -1
  std::size_t false_pos = 0;  ///< y_true = -1, y_pred = +1
  std::size_t true_neg = 0;   ///< y_true = -1, y_pred = -1
  double accuracy = 0.0;
  double false_negative_rate = 0.0;
  double true_positive_rate = 0.0;
  double average_exp_loss = 0.0;
};

/// Throws std::invalid_argument on a model/data arity mismatch.
Metrics evaluate(const Ensemble& ensemble, const Dataset& data);

/// Stable key=value lines.
std::string format_key_values(const Metrics& metrics);
std::string format_table(const Metrics& metrics);

}  // namespace droboost
