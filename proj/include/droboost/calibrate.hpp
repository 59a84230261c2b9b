#pragma once

// Choosing the KL radius from the empirical-likelihood limit law:
// 2 N R_N => chi-square with T degrees of freedom, so the radius that covers
// the population optimum with the requested confidence is
// delta = chi2_quantile(T, confidence) / (2 N).

#include <cstddef>
#include <span>
#include <vector>

namespace droboost {

struct CalibrationSpec {
  double confidence = 0.9;
  int dimension = 30;  ///< T, the dimension of the span of weak learners
  std::size_t n = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Regularized lower incomplete gamma P(a, x), by series for x < a + 1 and by
/// a Lentz continued fraction for Q(a, x) otherwise.
double regularized_gamma_p(double a, double x);

/// CDF of the chi-square distribution with `dof` degrees of freedom.
double chi2_cdf(int dof, double x);

/// q with P(T/2, q/2) = p, by bisection on [0, T + 40 sqrt(T) + 100] to 1e-10.
/// Throws std::invalid_argument unless T >= 1 and 0 < p < 1.
double chi2_quantile(int dof, double p);

double select_delta(const CalibrationSpec& spec);

struct EplResult {
  double value = 0.0;           ///< R_N
  std::vector<double> lambda;   ///< dual multiplier, length T
  std::vector<double> weights;  ///< w_i = 1 / (N (1 + lambda . M_i))
  int iterations = 0;
};

/// Empirical profile likelihood R_N = min { D(P || P_N) : E_P[M] = 0 } for an
/// N x T row-major moment matrix, via damped Newton on the concave dual
/// (1/N) sum log(1 + lambda . M_i). Throws SolverError("EPL undefined ...")
/// when zero is not inside the convex hull of the rows.
EplResult epl_value(std::span<const double> moments, std::size_t dimension);

}  // namespace droboost
