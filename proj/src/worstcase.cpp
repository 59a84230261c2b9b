#include "droboost/worstcase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "droboost/errors.hpp"

namespace droboost {

double kl_divergence(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("kl_divergence of an empty weight vector");
  double sum = 0.0;
  bool has_zero = false;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    has_zero = has_zero || w == 0.0;
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("weights sum to " + std::to_string(sum) + ", expected 1");
  }
  if (has_zero) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(weights.size());
  double acc = 0.0;
  for (double w : weights) acc += std::log(n * w);
  return -acc / n;
}

namespace {

// The dual is evaluated in the shifted variable t = -max_i L_i - beta > 0, so
// that u_i = -(L_i + beta) = (L_max - L_i) + t is formed from nonnegative gaps
// without cancellation near the pole at t = 0.
class ShiftedDual {
 public:
  ShiftedDual(std::span<const double> losses, double delta) : delta_(delta) {
    max_loss_ = *std::max_element(losses.begin(), losses.end());
    gaps_.reserve(losses.size());
    for (double l : losses) gaps_.push_back(max_loss_ - l);
  }

  double max_loss() const { return max_loss_; }
  double beta(double t) const { return -max_loss_ - t; }

  struct Eval {
    double value;
    double slope;  // d psi / dt >= 0
  };

  Eval operator()(double t) const {
    const double n = static_cast<double>(gaps_.size());
    double mean_log_u = 0.0;
    double mean_inv = 0.0;
    for (double g : gaps_) {
      double u = g + t;
      mean_log_u += std::log(u);
      mean_inv += 1.0 / u;
    }
    mean_log_u /= n;
    mean_inv /= n;
    double var_inv = 0.0;
    for (double g : gaps_) {
      double d = 1.0 / (g + t) - mean_inv;
      var_inv += d * d;
    }
    var_inv /= n;
    return {-mean_log_u - std::log(mean_inv) + delta_, var_inv / mean_inv};
  }

  std::vector<double> weights(double t) const {
    std::vector<double> w(gaps_.size());
    double total = 0.0;
    for (std::size_t i = 0; i < gaps_.size(); ++i) {
      w[i] = 1.0 / (gaps_[i] + t);
      total += w[i];
    }
    for (double& x : w) x /= total;
    return w;
  }

 private:
  double delta_;
  double max_loss_ = 0.0;
  std::vector<double> gaps_;
};

void check_domain(double beta, std::span<const double> losses) {
  if (losses.empty()) throw std::invalid_argument("empty loss vector");
  double max_loss = *std::max_element(losses.begin(), losses.end());
  if (!(beta < -max_loss)) {
    throw std::domain_error("beta = " + std::to_string(beta) + " is outside (-inf, -max L) with max L = " +
                            std::to_string(max_loss));
  }
}

WorstCase uniform_case(std::span<const double> losses) {
  WorstCase out;
  const double n = static_cast<double>(losses.size());
  out.weights.assign(losses.size(), 1.0 / n);
  double sum = 0.0;
  for (double l : losses) sum += l;
  out.objective = sum / n;
  out.achieved_kl = 0.0;
  return out;
}

constexpr int kMaxIterations = 200;
constexpr int kMaxBracketSteps = 200;
constexpr double kPsiTolerance = 1e-12;
constexpr double kBracketRelWidth = 1e-15;
constexpr double kInnerOffset = 1e-9;

}  // namespace

double psi(double beta, std::span<const double> losses, double delta) {
  check_domain(beta, losses);
  const double n = static_cast<double>(losses.size());
  double mean_log = 0.0;
  double mean_inv = 0.0;
  for (double l : losses) {
    double v = -1.0 / (l + beta);
    mean_log += std::log(v);
    mean_inv += v;
  }
  return mean_log / n - std::log(mean_inv / n) + delta;
}

std::vector<double> dual_weights(double beta, std::span<const double> losses) {
  check_domain(beta, losses);
  std::vector<double> w(losses.size());
  double total = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    w[i] = -1.0 / (losses[i] + beta);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

WorstCase solve_worst_case(std::span<const double> losses, double delta) {
  if (losses.empty()) throw std::invalid_argument("empty loss vector");
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("KL radius must be finite and >= 0, got " + std::to_string(delta));
  }
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (!std::isfinite(losses[i])) throw std::invalid_argument("loss " + std::to_string(i) + " is not finite");
  }
  auto [lo_it, hi_it] = std::minmax_element(losses.begin(), losses.end());
  const double spread = *hi_it - *lo_it;
  if (delta == 0.0 || spread < kConstantLossSpread) return uniform_case(losses);

  ShiftedDual dual(losses, delta);
  const double scale = std::max(1.0, spread);

  // Bracket [t_neg, t_pos] with psi(t_neg) < 0 < psi(t_pos).
  double t_pos = scale;
  auto f_pos = dual(t_pos);
  double t_neg = kInnerOffset * scale;
  auto f_neg = dual(t_neg);
  int steps = 0;
  while (f_pos.value <= 0.0) {
    if (++steps > kMaxBracketSteps) throw SolverError("worst-case dual: no positive psi found while expanding");
    t_neg = t_pos;
    f_neg = f_pos;
    t_pos *= 2.0;
    f_pos = dual(t_pos);
  }
  steps = 0;
  while (f_neg.value >= 0.0) {
    if (++steps > kMaxBracketSteps || t_neg < std::numeric_limits<double>::min()) {
      throw SolverError("worst-case dual: no negative psi found near the pole (loss spread " +
                        std::to_string(spread) + ")");
    }
    t_pos = t_neg;
    f_pos = f_neg;
    t_neg /= 1024.0;
    f_neg = dual(t_neg);
  }

  // Newton on psi(t), falling back to bisection (geometric when the bracket
  // spans orders of magnitude) whenever the step leaves the bracket.
  double t = f_pos.value < -f_neg.value ? t_pos : t_neg;
  auto f = f_pos.value < -f_neg.value ? f_pos : f_neg;
  int iterations = 0;
  bool polished = false;
  bool converged = false;
  while (iterations < kMaxIterations && !converged) {
    ++iterations;
    if (f.value == 0.0) {
      converged = true;
      break;
    }
    if (std::abs(f.value) < kPsiTolerance) {
      // One more Newton step tightens t past the psi tolerance at no risk.
      if (polished) {
        converged = true;
        break;
      }
      polished = true;
    }
    // Bracket collapsed to a few ulps of t: psi is at its rounding floor.
    if (t_pos - t_neg <= kBracketRelWidth * t_pos) {
      converged = true;
      break;
    }

    double next = f.slope > 0.0 ? t - f.value / f.slope : std::numeric_limits<double>::quiet_NaN();
    if (!(next > t_neg && next < t_pos)) {
      next = t_pos > 4.0 * t_neg ? std::sqrt(t_neg) * std::sqrt(t_pos) : 0.5 * (t_neg + t_pos);
      polished = false;
    }
    if (next == t) {
      converged = true;
      break;
    }
    t = next;
    f = dual(t);
    if (f.value < 0.0) {
      t_neg = t;
    } else if (f.value > 0.0) {
      t_pos = t;
    }
  }
  if (!converged) {
    throw SolverError("worst-case dual: no convergence in " + std::to_string(kMaxIterations) +
                      " iterations (|psi| = " + std::to_string(std::abs(f.value)) + ")");
  }

  WorstCase out;
  out.weights = dual.weights(t);
  out.beta_star = dual.beta(t);
  out.achieved_kl = kl_divergence(out.weights);
  double objective = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) objective += out.weights[i] * losses[i];
  out.objective = objective;
  out.iterations = iterations;
  return out;
}

}  // namespace droboost
