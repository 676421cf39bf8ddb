#pragma once

#include "ateml/learners/tree.hpp"

#include <cstdint>
#include <vector>

namespace ateml {

struct ForestParams {
  int n_trees = 500;
  int mtry = 0;  // 0 = round(sqrt(d))
  int min_leaf = 5;
  int max_depth = 0;
  std::uint64_t seed = 0;
  bool bootstrap = true;  // false only for testing the degenerate ensemble
};

struct ForestModel {
  std::vector<RegressionTree> trees;
  int mtry = 0;
  std::vector<std::uint64_t> tree_seeds;

  // Unweighted mean of the trees' predictions.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

int default_mtry(Eigen::Index d);

ForestModel fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params);

}  // namespace ateml
