#pragma once

#include "ateml/learners/tree.hpp"

#include <functional>
#include <vector>

namespace ateml {

enum class BoostLoss { squared, bernoulli };

struct BoostParams {
  int n_trees = 100;
  int max_depth = 2;
  double shrinkage = 0.1;
  int min_leaf = 10;
  BoostLoss loss = BoostLoss::squared;
};

// F(x) = F0 + shrinkage * sum_k tree_k(x); bernoulli models work on the
// log-odds scale and predict() returns expit(F).
struct BoostModel {
  double initial = 0.0;
  double shrinkage = 1.0;
  BoostLoss loss = BoostLoss::squared;
  std::vector<RegressionTree> trees;

  Eigen::VectorXd raw_predict(const Eigen::MatrixXd& x, std::size_t stages) const;
  Eigen::VectorXd raw_predict(const Eigen::MatrixXd& x) const { return raw_predict(x, trees.size()); }
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

// Called after every stage with the stage count and the training-row F.
using BoostStageHook = std::function<void(int stage, const Eigen::VectorXd& raw_train)>;

BoostModel fit_boost(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const BoostParams& params,
                     const BoostStageHook& hook = {});

}  // namespace ateml
