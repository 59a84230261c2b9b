#include "droboost/adaboost.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "droboost/errors.hpp"

namespace droboost {

AdaBoostResult train_adaboost(const Dataset& data, const TreeConfig& tree, int rounds) {
  if (rounds < 1) throw std::invalid_argument("AdaBoost needs at least one round");
  tree.validate();
  if (data.count_label(1) == 0 || data.count_label(-1) == 0) {
    throw DataError("AdaBoost needs both classes in the training data");
  }
  const std::size_t n = data.size();
  const double nd = static_cast<double>(n);

  AdaBoostResult result{Ensemble(data.n_features()), {}, {}, {}};
  std::vector<double> w(n, 1.0 / nd);
  std::vector<double> target(n);
  for (int t = 0; t < rounds; ++t) {
    result.round_weights.push_back(w);
    for (std::size_t i = 0; i < n; ++i) target[i] = nd * w[i] * data.label(i);
    Tree learner = fit_projection(data, target, tree);
    auto z = learner_margins(learner, data);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (z[i] < 0.0) err += w[i];
    }
    result.errors.push_back(err);
    if (err >= 0.5) break;
    const double alpha = err > 0.0 ? 0.5 * std::log((1.0 - err) / err) : kPerfectLearnerStep;
    result.steps.push_back(alpha);
    result.ensemble.append(alpha, std::move(learner));

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::exp(-alpha * z[i]);
      total += w[i];
    }
    for (double& x : w) x /= total;
    if (err == 0.0) break;
  }
  result.round_weights.push_back(w);
  return result;
}

namespace {

// argmin_{alpha >= 0} (1/N) sum phi(m_i + alpha z_i), by Newton on the
// derivative with bisection as the safeguard.
double exact_step(const Loss& loss, const std::vector<double>& m, const std::vector<double>& z) {
  auto slope = [&](double alpha, double* curvature) {
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      double x = m[i] + alpha * z[i];
      d1 += z[i] * loss.phi_prime(x);
      d2 += z[i] * z[i] * loss.phi_second(x);
    }
    if (curvature) *curvature = d2;
    return d1;
  };
  if (slope(0.0, nullptr) >= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 40 && slope(hi, nullptr) < 0.0; ++k) {
    lo = hi;
    hi *= 2.0;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double curvature = 0.0;
    double d = slope(x, &curvature);
    if (d == 0.0) return x;
    (d < 0.0 ? lo : hi) = x;
    double next = curvature > 0.0 ? x - d / curvature : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x)) return next;
    x = next;
  }
  return x;
}

}  // namespace

GradientBoostResult train_gradient_boost(const Dataset& data, LossKind kind, const TreeConfig& tree, int rounds,
                                         double stall_tolerance) {
  tree.validate();
  const Loss loss{kind};
  const std::size_t n = data.size();
  GradientBoostResult result{Ensemble(data.n_features()), {}};
  std::vector<double> m(n, 0.0);
  std::vector<double> target(n);
  auto mean_loss = [&] {
    double s = 0.0;
    for (double x : m) s += loss.phi(x);
    return s / static_cast<double>(n);
  };
  result.losses.push_back(mean_loss());
  for (int t = 0; t < rounds; ++t) {
    for (std::size_t i = 0; i < n; ++i) target[i] = -loss.phi_prime(m[i]) * data.label(i);
    Tree learner = fit_projection(data, target, tree);
    auto z = learner_margins(learner, data);
    double alpha = exact_step(loss, m, z);
    if (!(alpha > 0.0)) break;
    for (std::size_t i = 0; i < n; ++i) m[i] += alpha * z[i];
    result.ensemble.append(alpha, std::move(learner));
    double previous = result.losses.back();
    result.losses.push_back(mean_loss());
    if (previous - result.losses.back() < stall_tolerance * std::max(1.0, std::abs(previous))) break;
  }
  return result;
}

}  // namespace droboost
