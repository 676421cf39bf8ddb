#pragma once

#include "ateml/core/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ateml {

// Internal node: feature >= 0, rows with x[feature] <= threshold go left.
// Leaf: feature == -1 and `value` holds the prediction.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  int depth = 0;
  double weight = 0.0;  // training samples reaching the node (with multiplicity)

  bool is_leaf() const noexcept { return feature < 0; }
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  double predict_row(const Eigen::MatrixXd& x, Eigen::Index row) const;
  int leaf_of(const Eigen::MatrixXd& x, Eigen::Index row) const;

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  int depth() const;
  int leaf_count() const;

 private:
  std::vector<TreeNode> nodes_;
};

struct TreeParams {
  int max_depth = 0;  // 0 = unlimited
  int min_leaf = 1;
  int mtry = 0;       // features tried per split; 0 = all
};

// Greedy CART on squared error. Split candidates are midpoints between
// sorted distinct values; ties go to the lowest feature index, then the
// lowest threshold.
RegressionTree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int max_depth, int min_leaf);

// Presorts the feature matrix once so repeated tree fits (forests, boosting
// stages) split in O(n d) per level.
class TreeGrower {
 public:
  explicit TreeGrower(const Eigen::MatrixXd& x);

  // `multiplicity` (size n, may be empty = all ones) gives bootstrap counts.
  // When `hessian` is set, leaf values are sum(target) / max(sum(hessian), 1e-6).
  RegressionTree grow(const Eigen::VectorXd& target, const std::vector<int>& multiplicity,
                      const TreeParams& params, Rng* rng = nullptr,
                      const Eigen::VectorXd* hessian = nullptr) const;

 private:
  const Eigen::MatrixXd& x_;
  std::vector<std::vector<Eigen::Index>> order_;
};

}  // namespace ateml
