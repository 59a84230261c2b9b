#pragma once

// Worst-case reweighting of the data over a Kullback-Leibler ball around the
// empirical measure:
//
//   maximize  sum_i w_i L_i   subject to  w in simplex,  -(1/N) sum_i log(N w_i) <= delta.
//
// The maximizer is w_i proportional to -1/(L_i + beta*), where beta* is the
// unique root of the scalar dual function psi on (-inf, -max_i L_i).

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace droboost {

struct KlBall {
  double delta = 0.0;
  std::size_t support = 1;
};

struct WorstCase {
  std::vector<double> weights;
  /// Dual root; empty when the problem short-circuits to uniform weights
  /// (delta == 0 or constant losses).
  std::optional<double> beta_star;
  double achieved_kl = 0.0;
  /// sum_i weights[i] * losses[i]
  double objective = 0.0;
  int iterations = 0;
};

/// D(w || P_N) = -(1/N) sum_i log(N w_i); +inf if some w_i is zero.
/// Throws std::invalid_argument for negative weights or a sum off by more than 1e-9.
double kl_divergence(std::span<const double> weights);

/// psi(beta) = (1/N) sum log(-1/(L_i+beta)) - log((1/N) sum -1/(L_i+beta)) + delta.
/// Throws std::domain_error unless beta < -max_i L_i.
double psi(double beta, std::span<const double> losses, double delta);

/// Normalized dual weights w_i(beta) proportional to -1/(L_i + beta).
std::vector<double> dual_weights(double beta, std::span<const double> losses);

/// Spread below which a loss vector is treated as constant.
inline constexpr double kConstantLossSpread = 1e-12;

/// Solves the inner maximization. Throws std::invalid_argument for delta < 0 or
/// non-finite losses and SolverError when no sign change of psi can be bracketed.
WorstCase solve_worst_case(std::span<const double> losses, double delta);

}  // namespace droboost
