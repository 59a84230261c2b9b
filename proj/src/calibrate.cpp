#include "droboost/calibrate.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "droboost/errors.hpp"

namespace droboost {

void CalibrationSpec::validate() const {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0, 1), got " + std::to_string(confidence));
  }
  if (dimension < 1) throw std::invalid_argument("dimension T must be >= 1");
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
}

namespace {

constexpr double kGammaEps = 1e-15;
constexpr int kGammaMaxIter = 10000;

double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the modified Lentz method.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("incomplete gamma needs a > 0");
  if (x < 0.0) throw std::invalid_argument("incomplete gamma needs x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double chi2_cdf(int dof, double x) {
  if (dof < 1) throw std::invalid_argument("chi-square degrees of freedom must be >= 1");
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(int dof, double p) {
  if (dof < 1) throw std::invalid_argument("chi-square degrees of freedom must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  double lo = 0.0;
  double hi = dof + 40.0 * std::sqrt(static_cast<double>(dof)) + 100.0;
  while (hi - lo > 4e-16 * hi) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (chi2_cdf(dof, mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double select_delta(const CalibrationSpec& spec) {
  spec.validate();
  return chi2_quantile(spec.dimension, spec.confidence) / (2.0 * static_cast<double>(spec.n));
}

EplResult epl_value(std::span<const double> moments, std::size_t dimension) {
  if (dimension == 0) throw std::invalid_argument("moment dimension must be >= 1");
  if (moments.empty() || moments.size() % dimension != 0) {
    throw std::invalid_argument("moment matrix size is not a multiple of its dimension");
  }
  const std::size_t n = moments.size() / dimension;
  if (dimension > n) throw std::invalid_argument("moment dimension exceeds the number of rows");
  for (double m : moments) {
    if (!std::isfinite(m)) throw std::invalid_argument("moment matrix has non-finite entries");
  }

  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMatrix> m(moments.data(), static_cast<Eigen::Index>(n),
                                      static_cast<Eigen::Index>(dimension));
  const double inv_n = 1.0 / static_cast<double>(n);

  // h(lambda) = (1/N) sum log(1 + lambda . M_i), concave; R_N = max h.
  auto objective = [&](const Eigen::VectorXd& denom) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < denom.size(); ++i) s += std::log(denom[i]);
    return s * inv_n;
  };

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension));
  Eigen::VectorXd denom = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  double h = 0.0;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());

  EplResult result;
  constexpr int kMaxIter = 200;
  int iter = 0;
  bool converged = false;
  double grad_norm = 0.0;
  for (; iter < kMaxIter; ++iter) {
    Eigen::ArrayXd inv = denom.array().inverse();

    Eigen::VectorXd grad = (m.transpose() * inv.matrix()) * inv_n;
    grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (grad_norm < 1e-13 * scale) {
      converged = true;
      break;
    }
    RowMatrix weighted = m.array().colwise() * inv;
    Eigen::MatrixXd info = (weighted.transpose() * weighted) * inv_n;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw SolverError("EPL undefined at this F: singular moment covariance");
    }
    Eigen::VectorXd step = ldlt.solve(grad);
    if (!step.allFinite()) throw SolverError("EPL undefined at this F: singular moment covariance");

    if (step.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + lambda.lpNorm<Eigen::Infinity>())) {
      converged = true;
      break;
    }
    // Once the predicted gain is below the rounding level of h, comparing
    // objective values is noise, so the full Newton step is taken as is.
    const bool in_noise = grad.dot(step) < 1e-14 * (1.0 + std::abs(h));
    double t = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
      Eigen::VectorXd trial = lambda + t * step;
      Eigen::VectorXd trial_denom = (m * trial).array() + 1.0;
      if (trial_denom.minCoeff() <= 1e-12) continue;
      double trial_h = objective(trial_denom);
      if (trial_h >= h || (in_noise && t == 1.0)) {
        lambda = trial;
        denom = trial_denom;
        h = trial_h;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Rounding stalls the ascent only in the immediate vicinity of the optimum.
      converged = grad_norm < 1e-8 * scale;
      break;
    }
    if (lambda.lpNorm<Eigen::Infinity>() * scale > 1e12) {
      throw SolverError("EPL undefined at this F: zero is not inside the convex hull of the moments");
    }
  }
  if (!converged) {
    throw SolverError("EPL undefined at this F: dual Newton iteration did not converge");
  }

  result.iterations = iter;
  result.value = h;
  result.lambda.assign(lambda.data(), lambda.data() + lambda.size());
  result.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.weights[i] = inv_n / denom[static_cast<Eigen::Index>(i)];
  return result;
}

}  // namespace droboost
