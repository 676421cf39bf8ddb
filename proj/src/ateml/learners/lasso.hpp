#pragma once

#include "ateml/core/folds.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ateml {

// Objective: (1/2n) ||y - b0 - X_s beta||^2 + lambda ||beta||_1 on internally
// standardized columns (mean 0, <x, x>/n = 1). Coefficients are reported on
// the original column scale; the intercept is unpenalized.
struct LassoFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  double lambda = 0.0;
  std::vector<Eigen::Index> active_set;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  double l1_norm_standardized = 0.0;  // ||beta||_1 on the standardized scale
};

// Column means and scales (sd with divisor n); zero-variance columns get
// scale 0 and are never selected.
struct Standardization {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  explicit Standardization(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

LassoFit fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);

// Warm-started fits along `grid` (any order; processed as given).
std::vector<LassoFit> fit_lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const std::vector<double>& grid);

// `count` log-spaced values from lambda_max down to lambda_max * ratio.
std::vector<double> default_lambda_grid(double lambda_max, int count = 100, double ratio = 1e-4);

struct LassoCvResult {
  double lambda = 0.0;
  std::vector<double> grid;
  std::vector<double> cv_risk;  // one per grid value
  LassoFit fit;                 // refit on all rows at `lambda`
};

// Grid must be descending; empty grid selects the default grid. Ties in CV
// risk go to the larger lambda.
LassoCvResult lasso_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       std::vector<double> grid, const FoldAssignment& folds);

// Largest KKT violation on the standardized scale: for inactive j,
// max(0, |<x_j, r>/n| - lambda); for active j, |<x_j, r>/n - lambda sign(b_j)|.
double lasso_kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LassoFit& fit);

}  // namespace ateml
