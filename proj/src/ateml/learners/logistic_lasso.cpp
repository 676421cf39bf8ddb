#include "ateml/learners/logistic_lasso.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/loss.hpp"
#include "ateml/core/parallel.hpp"
#include "ateml/core/stats.hpp"
#include "ateml/learners/lasso.hpp"

#include <algorithm>
#include <cmath>

namespace ateml {

Eigen::VectorXd LogisticLassoFit::predict_proba(const Eigen::MatrixXd& x) const {
  if (x.cols() != coefficients.size())
    throw InvalidArgument("learners", "logistic lasso: column count mismatch");
  Eigen::VectorXd eta = x * coefficients;
  return eta.unaryExpr([this](double v) { return expit(v + intercept); });
}

namespace {

void check_binary(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() < 1 || y.size() != x.rows())
    throw InvalidArgument("learners", "logistic lasso: target length mismatch");
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("learners", "logistic lasso: non-finite input");
  bool has0 = false, has1 = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) has0 = true;
    else if (y[i] == 1.0) has1 = true;
    else throw InvalidArgument("learners", "logistic lasso: target must be 0/1");
  }
  if (!has0 || !has1) throw InvalidArgument("learners", "logistic lasso: both classes must be present");
}

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

class LogisticLassoSolver {
 public:
  LogisticLassoSolver(const Eigen::MatrixXd& xs, const Eigen::RowVectorXd& scale, const Eigen::VectorXd& y)
      : xs_(xs), scale_(scale), y_(y), beta_(Eigen::VectorXd::Zero(xs.cols())),
        n_(static_cast<double>(xs.rows())) {
    b0_ = logit(std::clamp(y.mean(), 1e-10, 1.0 - 1e-10));
  }

  void solve(double lambda) {
    const Eigen::Index n = xs_.rows();
    Eigen::VectorXd eta(n), w(n), z(n), r(n);
    for (int outer = 0; outer < 200; ++outer) {
      eta = xs_ * beta_;
      eta.array() += b0_;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double p = expit(eta[i]);
        w[i] = std::max(p * (1.0 - p), 1e-5);
        z[i] = eta[i] + (y_[i] - p) / w[i];
      }
      const Eigen::VectorXd beta_old = beta_;
      const double b0_old = b0_;
      r = z - eta;  // working residual
      const double w_sum = w.sum();
      Eigen::VectorXd curvature(xs_.cols());
      for (Eigen::Index j = 0; j < xs_.cols(); ++j)
        curvature[j] = scale_[j] > 0.0 ? w.dot(xs_.col(j).cwiseAbs2()) / n_ : 0.0;

      for (int inner = 0; inner < 10000; ++inner) {
        double max_delta = 0.0;
        const double db0 = w.dot(r) / w_sum;
        if (db0 != 0.0) {
          b0_ += db0;
          r.array() -= db0;
          max_delta = std::max(max_delta, std::abs(db0));
        }
        for (Eigen::Index j = 0; j < xs_.cols(); ++j) {
          if (curvature[j] <= 0.0) continue;
          const double g = xs_.col(j).cwiseProduct(w).dot(r) / n_ + curvature[j] * beta_[j];
          const double updated = soft_threshold(g, lambda) / curvature[j];
          const double delta = updated - beta_[j];
          if (delta != 0.0) {
            r.noalias() -= delta * xs_.col(j);
            beta_[j] = updated;
            max_delta = std::max(max_delta, std::abs(delta) * std::sqrt(curvature[j]));
          }
        }
        if (max_delta < 1e-10) break;
      }
      const double change = std::max((beta_ - beta_old).cwiseAbs().maxCoeff(), std::abs(b0_ - b0_old));
      if (change < 1e-9) break;
    }
  }

  const Eigen::VectorXd& beta() const { return beta_; }
  double intercept() const { return b0_; }

 private:
  const Eigen::MatrixXd& xs_;
  const Eigen::RowVectorXd& scale_;
  const Eigen::VectorXd& y_;
  Eigen::VectorXd beta_;
  double b0_ = 0.0;
  double n_;
};

}  // namespace

double logistic_lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  check_binary(x, y);
  const Standardization st(x);
  const Eigen::VectorXd yc = y.array() - y.mean();
  return (st.apply(x).transpose() * yc).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

std::vector<LogisticLassoFit> fit_logistic_lasso_path(const Eigen::MatrixXd& x,
                                                      const Eigen::VectorXd& y,
                                                      const std::vector<double>& grid) {
  check_binary(x, y);
  for (double l : grid)
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidArgument("learners", "logistic lasso: lambda must be >= 0");
  const Standardization st(x);
  const Eigen::MatrixXd xs = st.apply(x);
  LogisticLassoSolver solver(xs, st.scale, y);
  std::vector<LogisticLassoFit> fits;
  for (double lambda : grid) {
    solver.solve(lambda);
    LogisticLassoFit fit;
    fit.lambda = lambda;
    fit.intercept = solver.intercept();
    fit.coefficients = Eigen::VectorXd::Zero(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double b = solver.beta()[j];
      if (b == 0.0 || st.scale[j] == 0.0) continue;
      fit.coefficients[j] = b / st.scale[j];
      fit.intercept -= fit.coefficients[j] * st.mean[j];
      fit.active_set.push_back(j);
    }
    fits.push_back(std::move(fit));
  }
  return fits;
}

LogisticLassoFit fit_logistic_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  return fit_logistic_lasso_path(x, y, {lambda}).front();
}

LogisticLassoCvResult logistic_lasso_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        std::vector<double> grid, const FoldAssignment& folds) {
  check_binary(x, y);
  if (folds.size() != x.rows()) throw InvalidArgument("learners", "logistic_lasso_cv: folds do not match rows");
  if (grid.empty()) grid = default_lambda_grid(logistic_lasso_lambda_max(x, y), 50, 1e-3);
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] < grid[k - 1]))
      throw InvalidArgument("learners", "logistic_lasso_cv: grid must be strictly descending");

  std::vector<std::vector<double>> fold_risk(static_cast<std::size_t>(folds.folds));
  parallel_for(fold_risk.size(), [&](std::size_t f) {
    const auto train = folds.training_rows(static_cast<int>(f));
    const auto test = folds.holdout_rows(static_cast<int>(f));
    const Eigen::MatrixXd x_test = take_rows(x, test);
    const Eigen::VectorXd y_test = take(y, test);
    const auto path = fit_logistic_lasso_path(take_rows(x, train), take(y, train), grid);
    fold_risk[f].resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
      fold_risk[f][k] = loss_logloss(path[k].predict_proba(x_test), y_test);
  });

  LogisticLassoCvResult res;
  res.grid = grid;
  res.cv_risk.assign(grid.size(), 0.0);
  for (const auto& fr : fold_risk)
    for (std::size_t k = 0; k < grid.size(); ++k) res.cv_risk[k] += fr[k] / static_cast<double>(folds.folds);
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (res.cv_risk[k] < res.cv_risk[best]) best = k;
  res.lambda = grid[best];
  std::vector<double> warm(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  res.fit = fit_logistic_lasso_path(x, y, warm).back();
  return res;
}

}  // namespace ateml
