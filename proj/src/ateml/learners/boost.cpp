#include "ateml/learners/boost.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/stats.hpp"

#include <algorithm>

namespace ateml {

Eigen::VectorXd BoostModel::raw_predict(const Eigen::MatrixXd& x, std::size_t stages) const {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(x.rows());
  const std::size_t k_max = std::min(stages, trees.size());
  for (std::size_t k = 0; k < k_max; ++k) total += trees[k].predict(x);
  Eigen::VectorXd f = shrinkage * total;
  f.array() += initial;
  return f;
}

Eigen::VectorXd BoostModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd f = raw_predict(x);
  if (loss == BoostLoss::bernoulli) f = f.unaryExpr([](double v) { return expit(v); });
  return f;
}

BoostModel fit_boost(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const BoostParams& params,
                     const BoostStageHook& hook) {
  if (y.size() != x.rows() || x.rows() < 1) throw InvalidArgument("learners", "fit_boost: target length mismatch");
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("learners", "fit_boost: non-finite input");
  if (params.n_trees < 0 || params.max_depth < 1 || params.min_leaf < 1)
    throw InvalidArgument("learners", "fit_boost: bad tree parameters");
  if (!(params.shrinkage > 0.0 && params.shrinkage <= 1.0))
    throw InvalidArgument("learners", "fit_boost: shrinkage must lie in (0, 1]");

  BoostModel model;
  model.shrinkage = params.shrinkage;
  model.loss = params.loss;
  const double ybar = y.mean();
  if (params.loss == BoostLoss::bernoulli) {
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (y[i] != 0.0 && y[i] != 1.0) throw InvalidArgument("learners", "fit_boost: bernoulli loss needs a 0/1 target");
    model.initial = logit(std::clamp(ybar, 1e-10, 1.0 - 1e-10));
  } else {
    model.initial = ybar;
  }

  const TreeGrower grower(x);
  const TreeParams tp{params.max_depth, params.min_leaf, 0};
  Eigen::VectorXd f = Eigen::VectorXd::Constant(x.rows(), model.initial);
  Eigen::VectorXd gradient(x.rows()), hessian(x.rows());
  model.trees.reserve(static_cast<std::size_t>(params.n_trees));

  for (int stage = 1; stage <= params.n_trees; ++stage) {
    if (params.loss == BoostLoss::bernoulli) {
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double p = expit(f[i]);
        gradient[i] = y[i] - p;
        hessian[i] = p * (1.0 - p);
      }
      model.trees.push_back(grower.grow(gradient, {}, tp, nullptr, &hessian));
    } else {
      gradient = y - f;
      model.trees.push_back(grower.grow(gradient, {}, tp));
    }
    const RegressionTree& tree = model.trees.back();
    for (Eigen::Index i = 0; i < x.rows(); ++i) f[i] += params.shrinkage * tree.predict_row(x, i);
    if (hook) hook(stage, f);
  }
  return model;
}

}  // namespace ateml
