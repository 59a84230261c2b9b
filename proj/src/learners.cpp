#include "droboost/learners.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace droboost {

void TreeConfig::validate() const {
  if (max_depth < 1) throw std::invalid_argument("tree max_depth must be >= 1");
  if (min_leaf < 1) throw std::invalid_argument("tree min_leaf must be >= 1");
}

namespace {

using RowList = std::vector<std::uint32_t>;

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = -1.0;
};

class TreeGrower {
 public:
  TreeGrower(const Dataset& data, std::span<const double> target, const TreeConfig& config)
      : data_(data), target_(target), config_(config), goes_left_(data.size(), 0) {}

  Tree grow() {
    const std::size_t n = data_.size();
    const std::size_t d = data_.n_features();
    std::vector<RowList> sorted(d, RowList(n));
    for (std::size_t j = 0; j < d; ++j) {
      auto& rows = sorted[j];
      std::iota(rows.begin(), rows.end(), 0u);
      std::sort(rows.begin(), rows.end(), [&](std::uint32_t a, std::uint32_t b) {
        double xa = data_.feature(a, j), xb = data_.feature(b, j);
        return xa < xb || (xa == xb && a < b);
      });
    }
    build(sorted, 0);
    return Tree(std::move(nodes_), d);
  }

 private:
  // `sorted[j]` holds this node's rows ordered by feature j.
  void build(const std::vector<RowList>& sorted, int depth) {
    const RowList& rows = sorted.front();
    double total = 0.0;
    double abs_total = 0.0;
    for (std::uint32_t r : rows) {
      total += target_[r];
      abs_total += std::abs(target_[r]);
    }
    const std::size_t index = nodes_.size();
    nodes_.push_back(Tree::Node{-1, 0.0, total >= 0.0 ? 1.0 : -1.0, -1, -1});

    const auto min_leaf = static_cast<std::size_t>(config_.min_leaf);
    if (depth >= config_.max_depth || rows.size() < 2 * min_leaf) return;

    Split best = best_split(sorted, total);
    if (!(best.score > std::abs(total) + 1e-12 * abs_total)) return;

    for (std::uint32_t r : rows) goes_left_[r] = data_.feature(r, best.feature) <= best.threshold;
    std::vector<RowList> left(sorted.size()), right(sorted.size());
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      left[j].reserve(rows.size());
      right[j].reserve(rows.size());
      for (std::uint32_t r : sorted[j]) (goes_left_[r] ? left[j] : right[j]).push_back(r);
    }

    auto& node = nodes_[index];
    node.feature = static_cast<std::int32_t>(best.feature);
    node.threshold = best.threshold;
    node.value = 0.0;
    node.left = static_cast<std::int32_t>(nodes_.size());
    build(left, depth + 1);
    nodes_[index].right = static_cast<std::int32_t>(nodes_.size());
    build(right, depth + 1);
  }

  Split best_split(const std::vector<RowList>& sorted, double total) const {
    const auto min_leaf = static_cast<std::size_t>(config_.min_leaf);
    Split best;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      const RowList& rows = sorted[j];
      const std::size_t n = rows.size();
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left_sum += target_[rows[k]];
        const std::size_t n_left = k + 1;
        if (n_left < min_leaf) continue;
        if (n - n_left < min_leaf) break;
        const double lo = data_.feature(rows[k], j);
        const double hi = data_.feature(rows[k + 1], j);
        if (lo == hi) continue;
        const double score = std::abs(left_sum) + std::abs(total - left_sum);
        if (score > best.score) {
          double mid = lo + 0.5 * (hi - lo);
          if (!(mid >= lo && mid < hi)) mid = lo;
          best = {j, mid, score};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  std::span<const double> target_;
  const TreeConfig& config_;
  std::vector<char> goes_left_;
  std::vector<Tree::Node> nodes_;
};

}  // namespace

Tree fit_projection(const Dataset& data, std::span<const double> target, const TreeConfig& config) {
  config.validate();
  if (target.size() != data.size()) {
    throw std::invalid_argument("target length " + std::to_string(target.size()) + " differs from N = " +
                                std::to_string(data.size()));
  }
  if (data.size() < 2 * static_cast<std::size_t>(config.min_leaf)) {
    throw std::invalid_argument("need at least " + std::to_string(2 * config.min_leaf) + " rows, got " +
                                std::to_string(data.size()));
  }
  for (double t : target) {
    if (!std::isfinite(t)) throw std::invalid_argument("projection target is not finite");
  }
  return TreeGrower(data, target, config).grow();
}

}  // namespace droboost
