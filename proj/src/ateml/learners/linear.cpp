#include "ateml/learners/linear.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/stats.hpp"

#include <cmath>

namespace ateml {

Eigen::VectorXd LinearModel::linear_predictor(const Eigen::MatrixXd& x) const {
  if (x.cols() != coefficients.size())
    throw InvalidArgument("learners", "linear model: column count mismatch");
  Eigen::VectorXd eta = x * coefficients;
  eta.array() += intercept;
  return eta;
}

LinearModel fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() < 1 || y.size() != x.rows())
    throw InvalidArgument("learners", "fit_ols: need n >= 1 rows matching the target");
  if (!x.allFinite() || !y.allFinite())
    throw InvalidArgument("learners", "fit_ols: non-finite input");

  const Eigen::RowVectorXd col_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - col_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  LinearModel m;
  if (xc.cols() == 0 || xc.squaredNorm() == 0.0) {
    m.coefficients = Eigen::VectorXd::Zero(x.cols());
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xc);
    cod.setThreshold(1e-10);
    m.coefficients = cod.solve(yc);
  }
  m.intercept = y_mean - col_mean.dot(m.coefficients);
  return m;
}

Eigen::VectorXd LogisticFit::predict_proba(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd eta = model.linear_predictor(x);
  return eta.unaryExpr([](double v) { return expit(v); });
}

namespace {

struct IrlsOutcome {
  Eigen::VectorXd theta;  // [intercept, beta]
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
};

double penalized_loglik(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& theta, double ridge) {
  const Eigen::VectorXd eta = design * theta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    // log(1 + exp(e)) computed stably
    const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y[i] * e - softplus;
  }
  return ll - ridge * theta.tail(theta.size() - 1).squaredNorm();
}

IrlsOutcome run_irls(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, double ridge,
                     bool watch_divergence) {
  const Eigen::Index p = design.cols();
  IrlsOutcome out;
  out.theta = Eigen::VectorXd::Zero(p);
  const double ybar = y.mean();
  out.theta[0] = logit(std::clamp(ybar, 1e-10, 1.0 - 1e-10));

  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, 2.0 * ridge);
  penalty[0] = 0.0;

  double ll = penalized_loglik(design, y, out.theta, ridge);
  for (int iter = 1; iter <= kLogisticMaxIter; ++iter) {
    out.iterations = iter;
    const Eigen::VectorXd eta = design * out.theta;
    Eigen::VectorXd prob(eta.size()), weight(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob[i] = expit(eta[i]);
      weight[i] = prob[i] * (1.0 - prob[i]);
    }
    Eigen::VectorXd score = design.transpose() * (y - prob);
    score -= penalty.cwiseProduct(out.theta);
    if (score.cwiseAbs().maxCoeff() < 1e-8) {
      out.converged = true;
      break;
    }
    Eigen::MatrixXd info = design.transpose() * weight.asDiagonal() * design;
    info.diagonal() += penalty;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(info);
    const Eigen::VectorXd step = cod.solve(score);

    double scale = 1.0;
    Eigen::VectorXd candidate = out.theta + step;
    double cand_ll = penalized_loglik(design, y, candidate, ridge);
    for (int halving = 0; halving < 30 && !(cand_ll >= ll - 1e-12 * std::abs(ll)); ++halving) {
      scale *= 0.5;
      candidate = out.theta + scale * step;
      cand_ll = penalized_loglik(design, y, candidate, ridge);
    }
    out.theta = candidate;
    ll = cand_ll;
    if (watch_divergence && out.theta.tail(p - 1).norm() > 1e3) {
      out.diverged = true;
      return out;
    }
  }
  if (!out.converged) {
    // final convergence check after the last update
    const Eigen::VectorXd eta = design * out.theta;
    Eigen::VectorXd prob = eta.unaryExpr([](double v) { return expit(v); });
    Eigen::VectorXd score = design.transpose() * (y - prob) - penalty.cwiseProduct(out.theta);
    out.converged = score.cwiseAbs().maxCoeff() < 1e-8;
  }
  return out;
}

}  // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge) {
  if (x.rows() < 1 || y.size() != x.rows())
    throw InvalidArgument("learners", "fit_logistic: need n >= 1 rows matching the target");
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("learners", "fit_logistic: non-finite input");
  if (ridge < 0.0) throw InvalidArgument("learners", "fit_logistic: ridge must be >= 0");
  bool has0 = false, has1 = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) has0 = true;
    else if (y[i] == 1.0) has1 = true;
    else throw InvalidArgument("learners", "fit_logistic: target must be 0/1");
  }
  if (!has0 || !has1) throw InvalidArgument("learners", "fit_logistic: both classes must be present");

  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;

  IrlsOutcome res = run_irls(design, y, ridge, ridge == 0.0);
  LogisticFit fit;
  fit.ridge = ridge;
  bool separated = false;
  if (ridge == 0.0 && res.converged) {
    // fitted probabilities reproduce every label
    const Eigen::VectorXd eta = design * res.theta;
    separated = true;
    for (Eigen::Index i = 0; i < eta.size() && separated; ++i)
      separated = std::abs(y[i] - expit(eta[i])) < 1e-6;
  }
  if (ridge == 0.0 && (res.diverged || !res.converged || separated)) {
    res = run_irls(design, y, kSeparationRidge, false);
    fit.ridge = kSeparationRidge;
    fit.separation_refit = true;
  }
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  fit.model.intercept = res.theta[0];
  fit.model.coefficients = res.theta.tail(x.cols());
  return fit;
}

}  // namespace ateml
