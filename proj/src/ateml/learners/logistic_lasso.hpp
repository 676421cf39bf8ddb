#pragma once

#include "ateml/core/folds.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ateml {

// L1-penalized logistic regression: -(1/n) loglik + lambda ||beta||_1 on
// standardized columns, intercept unpenalized. Solved by proximal Newton
// (IRLS outer loop, coordinate descent inner loop).
struct LogisticLassoFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;  // original column scale
  double lambda = 0.0;
  std::vector<Eigen::Index> active_set;

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const;
};

double logistic_lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

std::vector<LogisticLassoFit> fit_logistic_lasso_path(const Eigen::MatrixXd& x,
                                                      const Eigen::VectorXd& y,
                                                      const std::vector<double>& grid);

LogisticLassoFit fit_logistic_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);

struct LogisticLassoCvResult {
  double lambda = 0.0;
  std::vector<double> grid;
  std::vector<double> cv_risk;  // held-out log-loss
  LogisticLassoFit fit;
};

// Default grid: 50 log-spaced values in [lambda_max * 1e-3, lambda_max].
LogisticLassoCvResult logistic_lasso_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        std::vector<double> grid, const FoldAssignment& folds);

}  // namespace ateml
