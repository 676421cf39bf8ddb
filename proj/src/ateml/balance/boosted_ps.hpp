#pragma once

#include "ateml/balance/balance.hpp"
#include "ateml/learners/boost.hpp"

#include <vector>

namespace ateml {

struct BoostedBalanceParams {
  int max_trees = 5000;
  int max_depth = 2;
  double shrinkage = 0.005;
  int min_leaf = 10;
  int stride = 10;
  double trim = kDefaultTrim;
};

struct BalanceTracePoint {
  int iteration = 0;
  double asam = 0.0;
};

struct BoostedBalanceFit {
  PsFit ps;
  int chosen_iteration = 0;
  std::vector<BalanceTracePoint> trace;  // iteration 0 first
  BoostModel model;                      // truncated to chosen_iteration trees

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;  // clipped PS
};

BoostedBalanceFit boosted_balance_ps(const Dataset& data, const BoostedBalanceParams& params = {});

}  // namespace ateml
