#pragma once

#include <Eigen/Dense>

namespace ateml {

struct LinearModel {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;

  Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& x) const;
};

// Least squares with a free intercept; rank-deficient designs get the
// minimum-norm coefficient vector.
LinearModel fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

struct LogisticFit {
  LinearModel model;
  double ridge = 0.0;           // penalty actually used
  int iterations = 0;
  bool converged = false;
  bool separation_refit = false;  // ridge = 0 diverged; refit with a tiny ridge

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const;
};

constexpr double kSeparationRidge = 1e-6;
constexpr int kLogisticMaxIter = 100;

// Penalized IRLS maximizing sum log-lik - ridge * ||beta||^2 (intercept
// unpenalized). Converged when the max score component is below 1e-8.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge = 0.0);

}  // namespace ateml
