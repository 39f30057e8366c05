#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "grabit/dataset.hpp"

namespace grabit {

struct TreeConfig {
  // Number of split levels below the root; 0 gives a single-leaf tree.
  int max_depth = 3;
  int min_samples_leaf = 1;

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
  double gain = 0.0;   // SSE reduction achieved by this node's split
  std::size_t count = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Binary regression tree with axis-aligned splits. A row goes left iff its
/// feature value is <= the node threshold. Node 0 is the root.
class RegressionTree {
 public:
  RegressionTree() : RegressionTree(constant(0.0, 0)) {}

  /// Builds a tree from raw nodes; throws kSchema on malformed topology.
  RegressionTree(std::vector<TreeNode> nodes, std::size_t n_features);

  static RegressionTree constant(double value, std::size_t n_features);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t num_leaves() const;
  int depth() const;

  /// Node index of the leaf that contains x. No dimension check.
  int leaf_index(std::span<const double> x) const;

  /// Leaf value for x. No dimension check; see predict_tree for the checked form.
  double predict(std::span<const double> x) const { return nodes_[static_cast<std::size_t>(leaf_index(x))].value; }

  /// Leaf node index of every training row, kept from fitting until the
  /// leaves are re-valued. Empty for trees not produced by fitting.
  const std::vector<int>& training_leaves() const { return training_leaves_; }
  void release_training_leaves() { training_leaves_ = {}; }

  void set_leaf_value(int node, double value);

  bool operator==(const RegressionTree& other) const {
    return nodes_ == other.nodes_ && n_features_ == other.n_features_;
  }

 private:
  friend class TreeGrower;

  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
  std::vector<int> training_leaves_;
};

/// Column orderings of a feature matrix, computed once and reused across
/// every tree fitted on the same rows. Holds a reference to the matrix.
class FeatureIndex {
 public:
  explicit FeatureIndex(const Matrix& features);

  const Matrix& features() const { return *features_; }
  std::size_t rows() const { return features_->rows(); }
  std::size_t cols() const { return features_->cols(); }

  // Row ids of column c in ascending value order (stable in row id).
  std::span<const std::size_t> order(std::size_t c) const { return {order_.data() + c * rows(), rows()}; }
  // The values of column c in that order.
  std::span<const double> sorted_values(std::size_t c) const { return {values_.data() + c * rows(), rows()}; }

 private:
  const Matrix* features_;
  std::vector<std::size_t> order_;
  std::vector<double> values_;
};

/// Greedy least-squares tree. Every split maximizes the SSE reduction over
/// all (feature, midpoint threshold) pairs; ties go to the lowest feature
/// and then the lowest threshold. Leaves start at their mean target.
RegressionTree fit_least_squares(const Matrix& features, std::span<const double> targets, const TreeConfig& config);
RegressionTree fit_least_squares(const FeatureIndex& index, std::span<const double> targets,
                                 const TreeConfig& config);

/// Replaces each leaf value by -sum(grad) / sum(hess) over its training rows
/// and drops the retained row map. Structure is unchanged.
RegressionTree newton_update_leaves(RegressionTree tree, std::span<const double> grad, std::span<const double> hess);

/// Checked prediction: throws when x has the wrong width.
double predict_tree(const RegressionTree& tree, std::span<const double> x);

}  // namespace grabit
