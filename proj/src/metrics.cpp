#include "droboost/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "droboost/model_io.hpp"

namespace droboost {

Metrics evaluate(const Ensemble& ensemble, const Dataset& data) {
  if (ensemble.n_features() != 0 && ensemble.n_features() != data.n_features()) {
    throw std::invalid_argument("model expects " + std::to_string(ensemble.n_features()) +
                                " features, data has " + std::to_string(data.n_features()));
  }
  Metrics m;
  m.n = data.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = ensemble.evaluate(data.row(i));
    const int pred = f >= 0.0 ? 1 : -1;
    const int y = data.label(i);
    loss += std::exp(-y * f);
    if (y == 1) {
      (pred == 1 ? m.true_pos : m.false_neg)++;
    } else {
      (pred == 1 ? m.false_pos : m.true_neg)++;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto positives = m.true_pos + m.false_neg;
  const auto negatives = m.true_neg + m.false_pos;
  m.accuracy = static_cast<double>(m.true_pos + m.true_neg) / static_cast<double>(m.n);
  m.false_negative_rate = positives ? static_cast<double>(m.true_pos) / static_cast<double>(positives) : nan;
  m.true_positive_rate = negatives ? static_cast<double>(m.true_neg) / static_cast<double>(negatives) : nan;
  m.average_exp_loss = loss / static_cast<double>(m.n);
  return m;
}

std::string format_key_values(const Metrics& m) {
  std::ostringstream out;
  out << "n=" << m.n << '\n'
      << "accuracy=" << format_real(m.accuracy) << '\n'
      << "false_negative_rate=" << format_real(m.false_negative_rate) << '\n'
      << "true_positive_rate=" << format_real(m.true_positive_rate) << '\n'
      << "average_exp_loss=" << format_real(m.average_exp_loss) << '\n'
      << "confusion_tp=" << m.true_pos << '\n'
      << "confusion_fn=" << m.false_neg << '\n'
      << "confusion_fp=" << m.false_pos << '\n'
      << "confusion_tn=" << m.true_neg << '\n';
  return out.str();
}

std::string format_table(const Metrics& m) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-44s %10s\n"
                "%-44s %10.4f\n"
                "%-44s %10.4f\n"
                "%-44s %10.4f\n"
                "%-44s %10.4f\n",
                "metric", "value", "accuracy P(y_true = y_pred)", m.accuracy,
                "false negative rate P(y_pred=+1 | y_true=+1)", m.false_negative_rate,
                "true positive rate P(y_pred=-1 | y_true=-1)", m.true_positive_rate, "average exponential loss",
                m.average_exp_loss);
  return buf;
}

}  // namespace droboost
