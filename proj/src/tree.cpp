#include "grabit/tree.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>

#include "grabit/error.hpp"

namespace grabit {
namespace {

// Gains closer than this fraction of the node SSE are ties. Equal partitions
// reached through different features differ only by rounding, so ties must
// be decided by the feature / threshold order rather than by the last bits.
// A split must also beat zero gain by this margin.
constexpr double kTieTolerance = 1e-10;

}  // namespace

void TreeConfig::validate() const {
  require(max_depth >= 0, fmt::format("max_depth must be >= 0, got {}", max_depth));
  require(max_depth <= 30, fmt::format("max_depth {} is unreasonably large", max_depth));
  require(min_samples_leaf >= 1, fmt::format("min_samples_leaf must be >= 1, got {}", min_samples_leaf));
}

RegressionTree::RegressionTree(std::vector<TreeNode> nodes, std::size_t n_features)
    : nodes_(std::move(nodes)), n_features_(n_features) {
  if (nodes_.empty()) fail(ErrorKind::kSchema, "tree has no nodes");
  // Every non-root node must have exactly one parent and children must come
  // after their parent, which rules out cycles.
  std::vector<int> parents(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& n = nodes_[i];
    if (n.is_leaf()) continue;
    if (static_cast<std::size_t>(n.feature) >= n_features_) {
      fail(ErrorKind::kSchema, fmt::format("node {} splits on feature {} of {}", i, n.feature, n_features_));
    }
    for (int child : {n.left, n.right}) {
      if (child <= static_cast<int>(i) || child >= static_cast<int>(nodes_.size())) {
        fail(ErrorKind::kSchema, fmt::format("node {} has invalid child {}", i, child));
      }
      ++parents[static_cast<std::size_t>(child)];
    }
    if (!std::isfinite(n.threshold)) fail(ErrorKind::kSchema, fmt::format("node {} has a non-finite threshold", i));
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (parents[i] != 1) fail(ErrorKind::kSchema, fmt::format("node {} is not reachable exactly once", i));
  }
}

RegressionTree RegressionTree::constant(double value, std::size_t n_features) {
  TreeNode leaf;
  leaf.value = value;
  return RegressionTree({leaf}, n_features);
}

std::size_t RegressionTree::num_leaves() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int RegressionTree::depth() const {
  std::vector<int> level(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& n = nodes_[i];
    deepest = std::max(deepest, level[i]);
    if (n.is_leaf()) continue;
    level[static_cast<std::size_t>(n.left)] = level[i] + 1;
    level[static_cast<std::size_t>(n.right)] = level[i] + 1;
  }
  return deepest;
}

int RegressionTree::leaf_index(std::span<const double> x) const {
  int k = 0;
  while (true) {
    const TreeNode& n = nodes_[static_cast<std::size_t>(k)];
    if (n.is_leaf()) return k;
    k = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
}

void RegressionTree::set_leaf_value(int node, double value) {
  require(node >= 0 && static_cast<std::size_t>(node) < nodes_.size() && nodes_[static_cast<std::size_t>(node)].is_leaf(),
          "set_leaf_value needs a leaf node");
  nodes_[static_cast<std::size_t>(node)].value = value;
}

FeatureIndex::FeatureIndex(const Matrix& features) : features_(&features) {
  const std::size_t n = features.rows();
  const std::size_t p = features.cols();
  order_.resize(n * p);
  values_.resize(n * p);
  std::vector<std::size_t> idx(n);
  for (std::size_t c = 0; c < p; ++c) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return features(a, c) < features(b, c); });
    for (std::size_t i = 0; i < n; ++i) {
      order_[c * n + i] = idx[i];
      values_[c * n + i] = features(idx[i], c);
    }
  }
}

class TreeGrower {
 public:
  TreeGrower(const FeatureIndex& index, std::span<const double> targets, const TreeConfig& config)
      : index_(index), x_(index.features()), t_(targets), config_(config) {}

  RegressionTree grow() {
    const std::size_t n = x_.rows();
    const std::size_t min_leaf = static_cast<std::size_t>(config_.min_samples_leaf);

    RegressionTree tree;
    tree.n_features_ = x_.cols();
    tree.nodes_.clear();
    node_of_row_.assign(n, 0);

    TreeNode root;
    root.count = n;
    tree.nodes_.push_back(root);

    std::vector<int> frontier;
    if (config_.max_depth > 0 && n >= 2 * min_leaf) frontier.push_back(0);

    for (int level = 0; level < config_.max_depth && !frontier.empty(); ++level) {
      find_splits(tree.nodes_, frontier);

      std::vector<int> next;
      std::vector<int> slot_of_node(tree.nodes_.size(), -1);
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        if (!best_[s].found) continue;
        const int id = frontier[s];
        slot_of_node[static_cast<std::size_t>(id)] = static_cast<int>(s);
        TreeNode& parent = tree.nodes_[static_cast<std::size_t>(id)];
        parent.feature = best_[s].feature;
        parent.threshold = best_[s].threshold;
        parent.gain = best_[s].gain;
        parent.left = static_cast<int>(tree.nodes_.size());
        parent.right = parent.left + 1;
        TreeNode left, right;
        left.count = best_[s].left_count;
        right.count = parent.count - left.count;
        tree.nodes_.push_back(left);
        tree.nodes_.push_back(right);
      }
      slot_of_node.resize(tree.nodes_.size(), -1);

      for (std::size_t r = 0; r < n; ++r) {
        const int id = node_of_row_[r];
        if (slot_of_node[static_cast<std::size_t>(id)] < 0) continue;
        const TreeNode& parent = tree.nodes_[static_cast<std::size_t>(id)];
        node_of_row_[r] = x_(r, static_cast<std::size_t>(parent.feature)) <= parent.threshold ? parent.left : parent.right;
      }

      for (int id : frontier) {
        const TreeNode& parent = tree.nodes_[static_cast<std::size_t>(id)];
        if (parent.is_leaf()) continue;
        for (int child : {parent.left, parent.right}) {
          if (tree.nodes_[static_cast<std::size_t>(child)].count >= 2 * min_leaf) next.push_back(child);
        }
      }
      frontier = std::move(next);
    }

    // Leaves start at the mean target of their rows.
    std::vector<double> sums(tree.nodes_.size(), 0.0);
    for (std::size_t r = 0; r < n; ++r) sums[static_cast<std::size_t>(node_of_row_[r])] += t_[r];
    for (std::size_t k = 0; k < tree.nodes_.size(); ++k) {
      TreeNode& node = tree.nodes_[k];
      if (node.is_leaf()) node.value = sums[k] / static_cast<double>(node.count);
    }
    tree.training_leaves_ = std::move(node_of_row_);
    return tree;
  }

 private:
  struct Best {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t left_count = 0;
  };

  void find_splits(const std::vector<TreeNode>& nodes, const std::vector<int>& frontier) {
    const std::size_t n = x_.rows();
    const std::size_t m = frontier.size();
    const std::size_t min_leaf = static_cast<std::size_t>(config_.min_samples_leaf);

    std::vector<int> slot(nodes.size(), -1);
    for (std::size_t s = 0; s < m; ++s) slot[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);

    // Node totals, two-pass SSE and target range.
    std::vector<double> sum(m, 0.0), sse(m, 0.0), lo(m, std::numeric_limits<double>::infinity()),
        hi(m, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> count(m, 0);
    for (std::size_t r = 0; r < n; ++r) {
      const int s = slot[static_cast<std::size_t>(node_of_row_[r])];
      if (s < 0) continue;
      const auto su = static_cast<std::size_t>(s);
      sum[su] += t_[r];
      ++count[su];
      lo[su] = std::min(lo[su], t_[r]);
      hi[su] = std::max(hi[su], t_[r]);
    }
    for (std::size_t r = 0; r < n; ++r) {
      const int s = slot[static_cast<std::size_t>(node_of_row_[r])];
      if (s < 0) continue;
      const auto su = static_cast<std::size_t>(s);
      const double d = t_[r] - sum[su] / static_cast<double>(count[su]);
      sse[su] += d * d;
    }

    best_.assign(m, Best{});
    std::vector<double> best_gain(m, 0.0);
    std::vector<double> left_sum(m);
    std::vector<std::size_t> left_count(m);
    std::vector<double> last(m);

    for (std::size_t c = 0; c < x_.cols(); ++c) {
      std::fill(left_sum.begin(), left_sum.end(), 0.0);
      std::fill(left_count.begin(), left_count.end(), 0);
      auto order = index_.order(c);
      auto values = index_.sorted_values(c);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = order[i];
        const int s = slot[static_cast<std::size_t>(node_of_row_[r])];
        if (s < 0) continue;
        const auto su = static_cast<std::size_t>(s);
        const double v = values[i];
        const std::size_t nl = left_count[su];
        if (nl >= min_leaf && v > last[su]) {
          const std::size_t nr = count[su] - nl;
          if (nr >= min_leaf) {
            const double dl = static_cast<double>(nl);
            const double dr = static_cast<double>(nr);
            const double diff = left_sum[su] / dl - (sum[su] - left_sum[su]) / dr;
            const double gain = dl * dr / static_cast<double>(count[su]) * diff * diff;
            if (gain > best_gain[su] + kTieTolerance * sse[su]) {
              double threshold = last[su] + 0.5 * (v - last[su]);
              if (!(threshold < v)) threshold = last[su];
              best_gain[su] = gain;
              best_[su] = {true, static_cast<int>(c), threshold, gain, nl};
            }
          }
        }
        left_sum[su] += t_[r];
        left_count[su] = nl + 1;
        last[su] = v;
      }
    }

    for (std::size_t s = 0; s < m; ++s) {
      if (!best_[s].found) continue;
      if (!(hi[s] > lo[s])) best_[s] = Best{};
    }
  }

  const FeatureIndex& index_;
  const Matrix& x_;
  std::span<const double> t_;
  const TreeConfig& config_;
  std::vector<int> node_of_row_;
  std::vector<Best> best_;
};

RegressionTree fit_least_squares(const FeatureIndex& index, std::span<const double> targets, const TreeConfig& config) {
  config.validate();
  if (index.rows() == 0) fail(ErrorKind::kInvalidArgument, "cannot fit a tree on an empty dataset");
  if (targets.size() != index.rows()) {
    fail(ErrorKind::kInvalidArgument, fmt::format("{} targets for {} rows", targets.size(), index.rows()));
  }
  for (double t : targets) {
    if (!std::isfinite(t)) fail(ErrorKind::kNumerical, "tree targets must be finite");
  }
  return TreeGrower(index, targets, config).grow();
}

RegressionTree fit_least_squares(const Matrix& features, std::span<const double> targets, const TreeConfig& config) {
  if (features.rows() == 0) fail(ErrorKind::kInvalidArgument, "cannot fit a tree on an empty dataset");
  for (double v : features.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::kNumerical, "tree features must be finite");
  }
  const FeatureIndex index(features);
  return fit_least_squares(index, targets, config);
}

RegressionTree newton_update_leaves(RegressionTree tree, std::span<const double> grad, std::span<const double> hess) {
  const auto& rows = tree.training_leaves();
  require(!rows.empty(), "tree carries no training rows to update leaves from");
  if (grad.size() != rows.size() || hess.size() != rows.size()) {
    fail(ErrorKind::kInvalidArgument,
         fmt::format("gradient/hessian lengths {}/{} do not match {} training rows", grad.size(), hess.size(), rows.size()));
  }
  std::vector<double> g(tree.nodes().size(), 0.0), h(tree.nodes().size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    g[static_cast<std::size_t>(rows[i])] += grad[i];
    h[static_cast<std::size_t>(rows[i])] += hess[i];
  }
  for (std::size_t k = 0; k < tree.nodes().size(); ++k) {
    if (!tree.nodes()[k].is_leaf()) continue;
    if (!(h[k] > 0.0)) fail(ErrorKind::kNumerical, fmt::format("leaf {} has non-positive Hessian sum {}", k, h[k]));
    tree.set_leaf_value(static_cast<int>(k), -g[k] / h[k]);
  }
  tree.release_training_leaves();
  return tree;
}

double predict_tree(const RegressionTree& tree, std::span<const double> x) {
  if (x.size() != tree.n_features()) {
    fail(ErrorKind::kInvalidArgument, fmt::format("tree expects {} features, got {}", tree.n_features(), x.size()));
  }
  return tree.predict(x);
}

}  // namespace grabit
