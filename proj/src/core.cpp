#include "droboost/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "droboost/errors.hpp"

namespace droboost {

Dataset::Dataset(std::vector<double> features, std::size_t n_features, std::vector<int> labels)
    : features_(std::move(features)), n_features_(n_features), labels_(std::move(labels)) {
  if (labels_.empty()) throw DataError("dataset has no rows");
  if (n_features_ == 0) throw DataError("dataset has no feature columns");
  if (features_.size() != labels_.size() * n_features_) {
    throw DataError("feature table holds " + std::to_string(features_.size()) + " values, expected " +
                    std::to_string(labels_.size()) + " x " + std::to_string(n_features_));
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 1 && labels_[i] != -1) {
      throw DataError("label of row " + std::to_string(i) + " is " + std::to_string(labels_[i]) +
                      ", expected -1 or +1");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<double> features;
  features.reserve(rows.size() * n_features_);
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw std::out_of_range("row index " + std::to_string(r) + " out of range");
    auto x = row(r);
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(labels_[r]);
  }
  return Dataset(std::move(features), n_features_, std::move(labels));
}

std::size_t Dataset::count_label(int y) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), y));
}

namespace {

// Checks that the subtree rooted at `i` is laid out in preorder and returns
// the index one past its last node.
std::size_t check_preorder(std::span<const Tree::Node> nodes, std::size_t i, std::size_t n_features) {
  if (i >= nodes.size()) throw std::invalid_argument("tree child index out of range");
  const auto& node = nodes[i];
  if (node.is_leaf()) {
    if (node.value != 1.0 && node.value != -1.0) {
      throw std::invalid_argument("tree leaf value must be -1 or +1");
    }
    return i + 1;
  }
  if (static_cast<std::size_t>(node.feature) >= n_features) {
    throw std::invalid_argument("tree split feature " + std::to_string(node.feature) + " exceeds arity " +
                                std::to_string(n_features));
  }
  if (!std::isfinite(node.threshold)) throw std::invalid_argument("tree threshold not finite");
  if (node.left != static_cast<std::int32_t>(i + 1)) throw std::invalid_argument("tree is not in preorder");
  std::size_t after_left = check_preorder(nodes, i + 1, n_features);
  if (node.right != static_cast<std::int32_t>(after_left)) throw std::invalid_argument("tree is not in preorder");
  return check_preorder(nodes, after_left, n_features);
}

int subtree_depth(std::span<const Tree::Node> nodes, std::size_t i) {
  const auto& node = nodes[i];
  if (node.is_leaf()) return 0;
  return 1 + std::max(subtree_depth(nodes, node.left), subtree_depth(nodes, node.right));
}

}  // namespace

Tree::Tree(std::vector<Node> nodes, std::size_t n_features) : nodes_(std::move(nodes)), n_features_(n_features) {
  if (nodes_.empty()) throw std::invalid_argument("tree has no nodes");
  if (n_features_ == 0) throw std::invalid_argument("tree arity must be positive");
  if (check_preorder(nodes_, 0, n_features_) != nodes_.size()) {
    throw std::invalid_argument("tree has unreachable nodes");
  }
}

Tree Tree::leaf(double value, std::size_t n_features) {
  return Tree({Node{-1, 0.0, value, -1, -1}}, n_features);
}

Tree Tree::stump(std::size_t feature, double threshold, double left_value, double right_value,
                 std::size_t n_features) {
  return Tree({Node{static_cast<std::int32_t>(feature), threshold, 0.0, 1, 2},
               Node{-1, 0.0, left_value, -1, -1},
               Node{-1, 0.0, right_value, -1, -1}},
              n_features);
}

double Tree::predict(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw std::invalid_argument("learner expects " + std::to_string(n_features_) + " features, got " +
                                std::to_string(x.size()));
  }
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& node = nodes_[i];
    i = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes_[i].value;
}

int Tree::depth() const { return nodes_.empty() ? 0 : subtree_depth(nodes_, 0); }

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::string Tree::summary() const {
  std::ostringstream out;
  out << "depth=" << depth() << ";leaves=" << leaf_count();
  if (!nodes_.empty() && !nodes_[0].is_leaf()) out << ";root=x" << nodes_[0].feature << "<=" << nodes_[0].threshold;
  return out.str();
}

void Ensemble::append(double coefficient, Tree learner) {
  if (n_features_ == 0) n_features_ = learner.n_features();
  if (learner.n_features() != n_features_) {
    throw std::invalid_argument("learner arity " + std::to_string(learner.n_features()) +
                                " does not match ensemble arity " + std::to_string(n_features_));
  }
  terms_.push_back({coefficient, std::move(learner)});
}

double Ensemble::evaluate(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& term : terms_) sum += term.coefficient * term.learner.predict(x);
  return sum;
}

Ensemble Ensemble::concatenated(const Ensemble& other) const {
  Ensemble out = *this;
  for (const auto& term : other.terms_) out.append(term.coefficient, term.learner);
  return out;
}

std::string to_string(LossKind kind) {
  return kind == LossKind::exponential ? "exp" : "logistic";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "exp" || name == "exponential") return LossKind::exponential;
  if (name == "logistic") return LossKind::logistic;
  throw std::invalid_argument("unknown loss '" + name + "' (expected exp or logistic)");
}

double Loss::phi(double margin) const {
  if (kind == LossKind::exponential) {
    if (margin < -700.0) {
      throw OutOfRangeError("exponential loss overflows at margin " + std::to_string(margin));
    }
    return std::exp(-margin);
  }
  // log(1 + e^{-m}) without overflow for large negative m.
  return margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

double Loss::phi_prime(double margin) const {
  if (kind == LossKind::exponential) return -phi(margin);
  // -1 / (1 + e^{m})
  if (margin > 0.0) {
    double e = std::exp(-margin);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(margin));
}

double Loss::phi_second(double margin) const {
  if (kind == LossKind::exponential) return phi(margin);
  double e = std::exp(-std::abs(margin));
  return e / ((1.0 + e) * (1.0 + e));
}

std::vector<double> evaluate_margins(const Ensemble& ensemble, const Dataset& data) {
  if (ensemble.n_features() != 0 && ensemble.n_features() != data.n_features()) {
    throw std::invalid_argument("ensemble expects " + std::to_string(ensemble.n_features()) +
                                " features, dataset has " + std::to_string(data.n_features()));
  }
  std::vector<double> margins(data.size(), 0.0);
  for (const auto& term : ensemble.terms()) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      margins[i] += term.coefficient * (data.label(i) * term.learner.predict(data.row(i)));
    }
  }
  return margins;
}

std::vector<double> learner_margins(const Tree& learner, const Dataset& data) {
  std::vector<double> z(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) z[i] = data.label(i) * learner.predict(data.row(i));
  return z;
}

std::vector<double> loss_vector(const Loss& loss, std::span<const double> margins) {
  std::vector<double> values(margins.size());
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (!std::isfinite(margins[i])) throw std::invalid_argument("margin " + std::to_string(i) + " is not finite");
    values[i] = loss.phi(margins[i]);
  }
  return values;
}

double inner_product(std::span<const double> f, std::span<const double> g) {
  if (f.size() != g.size()) {
    throw std::invalid_argument("inner product of vectors with lengths " + std::to_string(f.size()) + " and " +
                                std::to_string(g.size()));
  }
  if (f.empty()) throw std::invalid_argument("inner product of empty vectors");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * g[i];
  return sum / static_cast<double>(f.size());
}

}  // namespace droboost
