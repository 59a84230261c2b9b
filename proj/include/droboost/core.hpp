#pragma once

// Shared domain types: labelled datasets, tree learners, linear ensembles of
// learners, margin losses and the empirical inner product.
//
// Every function is represented through its values on the N data points; the
// empirical inner product only ever sees those values.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace droboost {

/// Immutable N x d feature table with labels in {-1, +1}.
class Dataset {
 public:
  /// `features` is row-major with `n_features` columns. Throws DataError when
  /// shapes disagree, N or d is zero, or a label is not exactly -1 or +1.
  Dataset(std::vector<double> features, std::size_t n_features, std::vector<int> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t n_features() const noexcept { return n_features_; }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * n_features_, n_features_};
  }
  double feature(std::size_t i, std::size_t j) const { return features_[i * n_features_ + j]; }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const noexcept { return labels_; }

  /// Rows selected in the given order. Indices must be < size().
  Dataset subset(std::span<const std::size_t> rows) const;

  std::size_t count_label(int y) const;

 private:
  std::vector<double> features_;
  std::size_t n_features_;
  std::vector<int> labels_;
};

/// Depth-limited binary tree with leaf values in {-1, +1}.
///
/// Nodes are stored in preorder. A node with `feature < 0` is a leaf. The
/// routing rule is "go left iff x[feature] <= threshold".
class Tree {
 public:
  struct Node {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double value = 1.0;
    std::int32_t left = -1;
    std::int32_t right = -1;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  Tree() = default;
  /// Validates the preorder layout and child links; throws std::invalid_argument.
  Tree(std::vector<Node> nodes, std::size_t n_features);

  static Tree leaf(double value, std::size_t n_features);
  static Tree stump(std::size_t feature, double threshold, double left_value, double right_value,
                    std::size_t n_features);

  /// Throws std::invalid_argument on arity mismatch.
  double predict(std::span<const double> x) const;

  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::size_t n_features() const noexcept { return n_features_; }
  int depth() const;
  std::size_t leaf_count() const;
  std::string summary() const;

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::vector<Node> nodes_;
  std::size_t n_features_ = 0;
};

/// F = sum_t coefficient_t * learner_t. The empty ensemble is the zero function.
class Ensemble {
 public:
  struct Term {
    double coefficient;
    Tree learner;
    friend bool operator==(const Term&, const Term&) = default;
  };

  explicit Ensemble(std::size_t n_features = 0) : n_features_(n_features) {}

  /// Throws std::invalid_argument when the learner arity differs from the ensemble's.
  void append(double coefficient, Tree learner);

  double evaluate(std::span<const double> x) const;
  /// sgn(F(x)) with sgn(0) = +1.
  int predict_label(std::span<const double> x) const { return evaluate(x) >= 0.0 ? 1 : -1; }

  std::span<const Term> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  std::size_t n_features() const noexcept { return n_features_; }

  Ensemble concatenated(const Ensemble& other) const;

  friend bool operator==(const Ensemble&, const Ensemble&) = default;

 private:
  std::size_t n_features_;
  std::vector<Term> terms_;
};

enum class LossKind { exponential, logistic };

std::string to_string(LossKind kind);
/// Accepts "exp", "exponential", "logistic". Throws std::invalid_argument.
LossKind parse_loss_kind(const std::string& name);

/// Margin loss phi(m) with m = y * F(x); convex and non-increasing.
struct Loss {
  LossKind kind = LossKind::exponential;

  /// Exponential loss of m < -700 throws OutOfRangeError instead of overflowing.
  double phi(double margin) const;
  double phi_prime(double margin) const;
  double phi_second(double margin) const;
};

/// m_i = Y_i * F(X_i). Throws std::invalid_argument on arity mismatch.
std::vector<double> evaluate_margins(const Ensemble& ensemble, const Dataset& data);

/// z_i = Y_i * h(X_i) for a single learner.
std::vector<double> learner_margins(const Tree& learner, const Dataset& data);

/// values[i] = phi(margins[i]).
std::vector<double> loss_vector(const Loss& loss, std::span<const double> margins);

/// <f, g>_N = (1/N) sum_i f_i g_i. Throws std::invalid_argument on length mismatch.
double inner_product(std::span<const double> f, std::span<const double> g);

}  // namespace droboost
