#include "ateml/learners/lasso.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/parallel.hpp"
#include "ateml/learners/linear.hpp"

#include <algorithm>
#include <cmath>

namespace ateml {

Standardization::Standardization(const Eigen::MatrixXd& x) {
  const double n = static_cast<double>(x.rows());
  mean = x.colwise().mean();
  scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - mean[j]).square().sum() / n;
    const double sd = std::sqrt(var);
    scale[j] = sd > 1e-12 * (1.0 + std::abs(mean[j])) ? sd : 0.0;
  }
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out = x.rowwise() - mean;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    if (scale[j] > 0.0) out.col(j) /= scale[j];
    else out.col(j).setZero();
  }
  return out;
}

Eigen::VectorXd LassoFit::predict(const Eigen::MatrixXd& x) const {
  if (x.cols() != coefficients.size()) throw InvalidArgument("learners", "lasso: column count mismatch");
  Eigen::VectorXd out = x * coefficients;
  out.array() += intercept;
  return out;
}

namespace {

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

void check_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() < 1 || y.size() != x.rows()) throw InvalidArgument("learners", "lasso: target length mismatch");
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("learners", "lasso: non-finite input");
}

// Coordinate descent on standardized columns; beta/residual updated in place.
class LassoSolver {
 public:
  LassoSolver(const Eigen::MatrixXd& xs, const Eigen::RowVectorXd& scale, const Eigen::VectorXd& yc)
      : xs_(xs), scale_(scale), yc_(yc), residual_(yc), beta_(Eigen::VectorXd::Zero(xs.cols())),
        n_(static_cast<double>(xs.rows())) {}

  void solve(double lambda) {
    if (lambda == 0.0) {
      solve_ols();
      return;
    }
    constexpr double kTol = 1e-11;
    constexpr double kKkt = 1e-8;
    for (int outer = 0; outer < 10000; ++outer) {
      full_pass(lambda);
      for (int inner = 0; inner < 100000; ++inner)
        if (active_pass(lambda) < kTol) break;
      if (full_pass(lambda) < kTol && kkt_violation(lambda) < kKkt) return;
    }
  }

  // Solution at or above lambda_max.
  void reset_to_zero() {
    residual_ = yc_;
    beta_.setZero();
  }

  const Eigen::VectorXd& beta() const { return beta_; }

 private:
  double update(Eigen::Index j, double lambda) {
    const double g = xs_.col(j).dot(residual_) / n_;
    const double updated = soft_threshold(g + beta_[j], lambda);
    const double delta = updated - beta_[j];
    if (delta != 0.0) {
      residual_.noalias() -= delta * xs_.col(j);
      beta_[j] = updated;
    }
    return std::abs(delta);
  }

  double full_pass(double lambda) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < xs_.cols(); ++j)
      if (scale_[j] > 0.0) max_delta = std::max(max_delta, update(j, lambda));
    return max_delta;
  }

  double active_pass(double lambda) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < xs_.cols(); ++j)
      if (beta_[j] != 0.0) max_delta = std::max(max_delta, update(j, lambda));
    return max_delta;
  }

  double kkt_violation(double lambda) const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < xs_.cols(); ++j) {
      if (scale_[j] == 0.0) continue;
      const double g = xs_.col(j).dot(residual_) / n_;
      const double v = beta_[j] == 0.0 ? std::max(0.0, std::abs(g) - lambda)
                                       : std::abs(g - lambda * (beta_[j] > 0 ? 1.0 : -1.0));
      worst = std::max(worst, v);
    }
    return worst;
  }

  void solve_ols() {
    const Eigen::VectorXd yc = residual_ + xs_ * beta_;
    const LinearModel m = fit_ols(xs_, yc);
    beta_ = m.coefficients;
    for (Eigen::Index j = 0; j < beta_.size(); ++j)
      if (scale_[j] == 0.0) beta_[j] = 0.0;
    residual_ = yc - xs_ * beta_;
  }

  const Eigen::MatrixXd& xs_;
  const Eigen::RowVectorXd& scale_;
  const Eigen::VectorXd& yc_;
  Eigen::VectorXd residual_;
  Eigen::VectorXd beta_;
  double n_;
};

LassoFit to_original_scale(const Standardization& st, double y_mean, const Eigen::VectorXd& beta_std,
                           double lambda) {
  LassoFit fit;
  fit.lambda = lambda;
  fit.coefficients = Eigen::VectorXd::Zero(beta_std.size());
  fit.intercept = y_mean;
  for (Eigen::Index j = 0; j < beta_std.size(); ++j) {
    if (beta_std[j] == 0.0 || st.scale[j] == 0.0) continue;
    fit.coefficients[j] = beta_std[j] / st.scale[j];
    fit.intercept -= fit.coefficients[j] * st.mean[j];
    fit.active_set.push_back(j);
    fit.l1_norm_standardized += std::abs(beta_std[j]);
  }
  return fit;
}

}  // namespace

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  check_inputs(x, y);
  const Standardization st(x);
  const Eigen::MatrixXd xs = st.apply(x);
  const Eigen::VectorXd yc = y.array() - y.mean();
  return (xs.transpose() * yc).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

std::vector<LassoFit> fit_lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const std::vector<double>& grid) {
  check_inputs(x, y);
  for (double l : grid)
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidArgument("learners", "lasso: lambda must be finite and >= 0");
  const Standardization st(x);
  const Eigen::MatrixXd xs = st.apply(x);
  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;
  const double lambda_max = (xs.transpose() * yc).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
  LassoSolver solver(xs, st.scale, yc);
  std::vector<LassoFit> fits;
  fits.reserve(grid.size());
  for (double lambda : grid) {
    if (lambda >= lambda_max && lambda > 0.0)
      solver.reset_to_zero();
    else
      solver.solve(lambda);
    fits.push_back(to_original_scale(st, y_mean, solver.beta(), lambda));
  }
  return fits;
}

LassoFit fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  return fit_lasso_path(x, y, {lambda}).front();
}

std::vector<double> default_lambda_grid(double lambda_max, int count, double ratio) {
  if (!(lambda_max > 0.0)) return {0.0};
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double step = count > 1 ? std::log(ratio) / (count - 1) : 0.0;
  for (int k = 0; k < count; ++k) grid[static_cast<std::size_t>(k)] = lambda_max * std::exp(step * k);
  grid.front() = lambda_max;
  return grid;
}

LassoCvResult lasso_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<double> grid,
                       const FoldAssignment& folds) {
  check_inputs(x, y);
  if (folds.size() != x.rows()) throw InvalidArgument("learners", "lasso_cv: folds do not match rows");
  if (grid.empty()) grid = default_lambda_grid(lasso_lambda_max(x, y));
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] < grid[k - 1])) throw InvalidArgument("learners", "lasso_cv: grid must be strictly descending");

  std::vector<std::vector<double>> fold_risk(static_cast<std::size_t>(folds.folds));
  parallel_for(fold_risk.size(), [&](std::size_t f) {
    const auto train = folds.training_rows(static_cast<int>(f));
    const auto test = folds.holdout_rows(static_cast<int>(f));
    const Eigen::MatrixXd x_test = take_rows(x, test);
    const Eigen::VectorXd y_test = take(y, test);
    const auto path = fit_lasso_path(take_rows(x, train), take(y, train), grid);
    fold_risk[f].resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
      fold_risk[f][k] = (path[k].predict(x_test) - y_test).squaredNorm() / static_cast<double>(test.size());
  });

  LassoCvResult res;
  res.grid = grid;
  res.cv_risk.assign(grid.size(), 0.0);
  for (const auto& fr : fold_risk)
    for (std::size_t k = 0; k < grid.size(); ++k) res.cv_risk[k] += fr[k] / static_cast<double>(folds.folds);

  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (res.cv_risk[k] < res.cv_risk[best]) best = k;
  res.lambda = grid[best];
  std::vector<double> warm(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  res.fit = fit_lasso_path(x, y, warm).back();
  return res;
}

double lasso_kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LassoFit& fit) {
  const Standardization st(x);
  const Eigen::MatrixXd xs = st.apply(x);
  Eigen::VectorXd beta_std(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) beta_std[j] = fit.coefficients[j] * st.scale[j];
  const Eigen::VectorXd r = (y.array() - y.mean()).matrix() - xs * beta_std;
  const double n = static_cast<double>(x.rows());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (st.scale[j] == 0.0) continue;
    const double g = xs.col(j).dot(r) / n;
    const double v = beta_std[j] == 0.0 ? std::max(0.0, std::abs(g) - fit.lambda)
                                        : std::abs(g - fit.lambda * (beta_std[j] > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace ateml
