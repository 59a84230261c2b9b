#include "droboost/boost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "droboost/errors.hpp"
#include "droboost/worstcase.hpp"

namespace droboost {

void TrainConfig::validate() const {
  tree.validate();
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (!(stall_tolerance > 0.0)) throw std::invalid_argument("stall_tolerance must be > 0");
  if (!(line_search.tolerance > 0.0) || !(line_search.initial_step > 0.0)) {
    throw std::invalid_argument("line-search tolerance and initial step must be > 0");
  }
  if (line_search.max_evaluations < 3 || line_search.max_expansions < 0) {
    throw std::invalid_argument("line-search budgets are too small");
  }
  switch (radius.kind) {
    case RadiusRule::Kind::fixed:
      if (!(radius.delta >= 0.0) || !std::isfinite(radius.delta)) {
        throw std::invalid_argument("KL radius must be finite and >= 0");
      }
      break;
    case RadiusRule::Kind::calibrated:
      CalibrationSpec{radius.confidence, radius.dimension, 1}.validate();
      break;
    case RadiusRule::Kind::adaboost:
      if (loss != LossKind::exponential) {
        throw std::invalid_argument("the AdaBoost radius rule requires the exponential loss");
      }
      break;
  }
}

std::vector<double> robust_gradient(std::span<const double> margins, std::span<const int> labels,
                                    const Loss& loss, std::span<const double> weights) {
  if (margins.size() != labels.size() || margins.size() != weights.size()) {
    throw std::invalid_argument("robust_gradient: margins, labels and weights differ in length");
  }
  const double n = static_cast<double>(margins.size());
  std::vector<double> g(margins.size());
  for (std::size_t i = 0; i < margins.size(); ++i) {
    double slope = loss.phi_prime(margins[i]);
    if (!std::isfinite(slope)) throw OutOfRangeError("loss derivative is not finite at point " + std::to_string(i));
    g[i] = n * weights[i] * slope * labels[i];
  }
  return g;
}

double robust_loss(std::span<const double> margins, const Loss& loss, double delta) {
  return solve_worst_case(loss_vector(loss, margins), delta).objective;
}

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
constexpr double kPolishSlack = 1e-10;

double safe_eval(const std::function<double(double)>& f, double x) {
  try {
    double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const OutOfRangeError&) {
    return std::numeric_limits<double>::infinity();
  }
}

// Illinois false position on a sign change of `derivative` in [lo, hi].
std::optional<double> derivative_root(const std::function<double(double)>& derivative, double lo, double hi) {
  double d_lo = safe_eval(derivative, lo);
  double d_hi = safe_eval(derivative, hi);
  if (!(std::isfinite(d_lo) && std::isfinite(d_hi)) || !(d_lo < 0.0 && d_hi > 0.0)) return std::nullopt;
  int side = 0;
  double x = lo;
  for (int it = 0; it < 100; ++it) {
    x = (lo * d_hi - hi * d_lo) / (d_hi - d_lo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    double d = safe_eval(derivative, x);
    if (!std::isfinite(d)) return std::nullopt;
    if (d == 0.0) return x;
    if (d < 0.0) {
      lo = x;
      d_lo = d;
      if (side == -1) d_hi *= 0.5;
      side = -1;
    } else {
      hi = x;
      d_hi = d;
      if (side == 1) d_lo *= 0.5;
      side = 1;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

}  // namespace

double minimize_step(const std::function<double(double)>& objective,
                     const std::function<double(double)>& derivative, const LineSearchConfig& config) {
  int evaluations = 0;
  double best_x = 0.0;
  double best_f = std::numeric_limits<double>::infinity();
  auto eval = [&](double x) {
    ++evaluations;
    double v = safe_eval(objective, x);
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
    return v;
  };

  const double f0 = eval(0.0);
  if (!std::isfinite(f0)) throw SolverError("line search: objective is not finite at the current iterate");

  // Bracket the minimizer of the convex objective in [lo, hi].
  double lo = 0.0;
  double hi = config.initial_step;
  double f_hi = eval(hi);
  if (f_hi < f0) {
    double prev = 0.0;
    double cur = hi;
    double f_cur = f_hi;
    bool bracketed = false;
    for (int k = 0; k < config.max_expansions && evaluations < config.max_evaluations; ++k) {
      double next = 2.0 * cur;
      double f_next = eval(next);
      if (f_next >= f_cur) {
        lo = prev;
        hi = next;
        bracketed = true;
        break;
      }
      prev = cur;
      cur = next;
      f_cur = f_next;
    }
    // Still descending at the largest admissible step.
    if (!bracketed) return best_x;
  }

  // Golden-section search on [lo, hi].
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = eval(x1);
  double f2 = eval(x2);
  while (hi - lo > config.tolerance && evaluations < config.max_evaluations) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = eval(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = eval(x2);
    }
  }

  if (derivative) {
    // Expand the final interval slightly so a minimizer sitting on its edge is
    // still enclosed by a derivative sign change.
    double width = std::max(hi - lo, config.tolerance);
    double a = std::max(0.0, lo - width);
    double b = hi + width;
    if (auto root = derivative_root(derivative, a, b)) {
      double f_root = safe_eval(objective, *root);
      // Near the minimum objective values differ only by rounding, so the
      // comparison is a sanity guard rather than a strict decrease test.
      if (f_root <= best_f + kPolishSlack * std::max(1.0, std::abs(best_f)) && f_root <= f0) {
        return *root;
      }
    }
  }
  return best_x;
}

double line_search(std::span<const double> margins, std::span<const double> direction_margins,
                   const Loss& loss, double delta, std::span<const double> weights,
                   const LineSearchConfig& config) {
  if (margins.size() != direction_margins.size() || margins.size() != weights.size()) {
    throw std::invalid_argument("line_search: margins, direction and weights differ in length");
  }
  const std::size_t n = margins.size();
  std::vector<double> trial(n);
  auto shifted = [&](double alpha) {
    for (std::size_t i = 0; i < n; ++i) trial[i] = margins[i] + alpha * direction_margins[i];
    return std::span<const double>(trial);
  };

  std::function<double(double)> objective;
  std::function<double(double)> derivative;
  if (config.mode == LineSearchMode::fixed_weights) {
    objective = [&](double alpha) {
      auto m = shifted(alpha);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += weights[i] * loss.phi(m[i]);
      return s;
    };
    derivative = [&](double alpha) {
      auto m = shifted(alpha);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += weights[i] * direction_margins[i] * loss.phi_prime(m[i]);
      return s;
    };
  } else {
    objective = [&](double alpha) { return robust_loss(shifted(alpha), loss, delta); };
    // Danskin: with a unique maximizer, the derivative of the max is the
    // derivative of the objective at that maximizer.
    derivative = [&](double alpha) {
      auto m = shifted(alpha);
      auto wc = solve_worst_case(loss_vector(loss, m), delta);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += wc.weights[i] * direction_margins[i] * loss.phi_prime(m[i]);
      return s;
    };
  }
  return minimize_step(objective, derivative, config);
}

double line_search(const Dataset& data, const Ensemble& ensemble, const Tree& direction,
                   std::span<const double> weights, double delta, const TrainConfig& config) {
  auto margins = evaluate_margins(ensemble, data);
  auto z = learner_margins(direction, data);
  return line_search(margins, z, Loss{config.loss}, delta, weights, config.line_search);
}

double resolve_delta(const RadiusRule& rule, std::size_t n) {
  switch (rule.kind) {
    case RadiusRule::Kind::fixed:
      return rule.delta;
    case RadiusRule::Kind::calibrated:
      return select_delta({rule.confidence, rule.dimension, n});
    case RadiusRule::Kind::adaboost:
      break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

double mean_loss(std::span<const double> margins, const Loss& loss) {
  double s = 0.0;
  for (double m : margins) s += loss.phi(m);
  return s / static_cast<double>(margins.size());
}

// Radius at which the worst case over the losses -exp(m_i) has dual root 0:
// log((1/N) sum exp(-m_i)) + (1/N) sum m_i, which is >= 0 by Jensen.
double adaboost_delta(std::span<const double> margins) {
  const double n = static_cast<double>(margins.size());
  double max_neg = -std::numeric_limits<double>::infinity();
  double mean_m = 0.0;
  for (double m : margins) {
    max_neg = std::max(max_neg, -m);
    mean_m += m;
  }
  mean_m /= n;
  double s = 0.0;
  for (double m : margins) s += std::exp(-m - max_neg);
  return std::max(0.0, max_neg + std::log(s / n) + mean_m);
}

std::vector<double> negated_exp_losses(std::span<const double> margins) {
  std::vector<double> losses(margins.size());
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (margins[i] > 700.0) throw OutOfRangeError("negated exponential loss overflows at margin " + std::to_string(margins[i]));
    losses[i] = -std::exp(margins[i]);
  }
  return losses;
}

class Trainer {
 public:
  Trainer(const Dataset& data, const TrainConfig& config)
      : data_(data), config_(config), loss_{config.loss}, margins_(data.size(), 0.0), ensemble_(data.n_features()) {}

  TrainResult run() {
    const bool adaboost_rule = config_.radius.kind == RadiusRule::Kind::adaboost;
    trace_.delta = resolve_delta(config_.radius, data_.size());

    // F_0 = 0: every loss equals phi(0), so the worst case is uniform.
    reweight(0, 0.0, "");
    for (int it = 1; it <= config_.max_iters; ++it) {
      try {
        if (!step(it, adaboost_rule)) break;
      } catch (const SolverError& e) {
        throw SolverError("iteration " + std::to_string(it) + ": " + e.what());
      } catch (const std::range_error& e) {
        throw SolverError("iteration " + std::to_string(it) + ": " + e.what());
      }
    }
    return {std::move(ensemble_), std::move(trace_)};
  }

 private:
  // Returns false when training should stop.
  bool step(int it, bool adaboost_rule) {
    const auto& current = trace_.records.back();
    // With the AdaBoost rule the worst-case weights already carry F, so the
    // subgradient and step are taken for the increment, i.e. at zero margin.
    std::vector<double> base_margins = adaboost_rule ? std::vector<double>(data_.size(), 0.0) : margins_;

    auto g = robust_gradient(base_margins, data_.labels(), loss_, current.weights);
    for (double& v : g) v = -v;
    Tree learner = fit_projection(data_, g, config_.tree);
    auto z = learner_margins(learner, data_);

    LineSearchConfig ls = config_.line_search;
    if (adaboost_rule) ls.mode = LineSearchMode::fixed_weights;
    double alpha = line_search(base_margins, z, loss_, trace_.delta, current.weights, ls);
    if (!(alpha > 0.0)) return false;

    for (std::size_t i = 0; i < margins_.size(); ++i) margins_[i] += alpha * z[i];
    std::string summary = learner.summary();
    ensemble_.append(alpha, std::move(learner));

    const double previous = adaboost_rule ? current.empirical_loss : current.robust_loss;
    reweight(it, alpha, std::move(summary));
    const auto& latest = trace_.records.back();
    const double now = adaboost_rule ? latest.empirical_loss : latest.robust_loss;
    return previous - now >= config_.stall_tolerance * std::max(1.0, std::abs(previous));
  }

  void reweight(int it, double alpha, std::string learner) {
    IterationRecord rec;
    rec.iteration = it;
    rec.step = alpha;
    rec.learner = std::move(learner);
    rec.empirical_loss = mean_loss(margins_, loss_);
    WorstCase wc;
    if (config_.radius.kind == RadiusRule::Kind::adaboost) {
      rec.delta = adaboost_delta(margins_);
      wc = solve_worst_case(negated_exp_losses(margins_), rec.delta);
    } else {
      rec.delta = trace_.delta;
      wc = solve_worst_case(loss_vector(loss_, margins_), rec.delta);
    }
    rec.robust_loss = wc.objective;
    rec.achieved_kl = wc.achieved_kl;
    rec.beta_star = wc.beta_star;
    rec.weights = std::move(wc.weights);
    trace_.records.push_back(std::move(rec));
  }

  const Dataset& data_;
  const TrainConfig& config_;
  Loss loss_;
  std::vector<double> margins_;
  Ensemble ensemble_;
  TrainTrace trace_;
};

}  // namespace

TrainResult train(const Dataset& data, const TrainConfig& config) {
  config.validate();
  return Trainer(data, config).run();
}

}  // namespace droboost
