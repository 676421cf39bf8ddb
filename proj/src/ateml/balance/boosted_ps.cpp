#include "ateml/balance/boosted_ps.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/stats.hpp"

namespace ateml {
namespace {

Eigen::VectorXd to_ps(const Eigen::VectorXd& raw, double trim) {
  Eigen::VectorXd p(raw.size());
  for (Index i = 0; i < raw.size(); ++i) p[i] = std::min(1.0 - trim, std::max(trim, expit(raw[i])));
  return p;
}

}  // namespace

Eigen::VectorXd BoostedBalanceFit::predict(const Eigen::MatrixXd& x) const {
  return to_ps(model.raw_predict(x), ps.trim);
}

BoostedBalanceFit boosted_balance_ps(const Dataset& data, const BoostedBalanceParams& params) {
  if (params.max_trees < 1 || params.stride < 1 || params.max_depth < 1 || params.min_leaf < 1 ||
      !(params.shrinkage > 0.0))
    throw InvalidArgument("balance", "boosted_balance_ps: invalid boosting parameters");
  if (!(params.trim > 0.0 && params.trim < 0.5)) throw InvalidArgument("balance", "trim must lie in (0, 0.5)");

  const Eigen::MatrixXd& x = data.covariates();
  const Eigen::VectorXd& a = data.treatment();
  const auto balance_at = [&](const Eigen::VectorXd& raw) {
    const Eigen::VectorXd w = iptw_weights(to_ps(raw, params.trim), a).w;
    return asam(x, a, &w);
  };

  BoostedBalanceFit fit;
  const double initial = logit(a.mean());
  Eigen::VectorXd best_raw = Eigen::VectorXd::Constant(x.rows(), initial);
  double best = balance_at(best_raw);
  fit.trace.push_back({0, best});
  fit.chosen_iteration = 0;

  BoostParams bp{params.max_trees, params.max_depth, params.shrinkage, params.min_leaf, BoostLoss::bernoulli};
  BoostModel model = fit_boost(x, a, bp, [&](int stage, const Eigen::VectorXd& raw) {
    if (stage % params.stride != 0) return;
    const double value = balance_at(raw);
    fit.trace.push_back({stage, value});
    if (value < best) {
      best = value;
      best_raw = raw;
      fit.chosen_iteration = stage;
    }
  });
  model.trees.resize(static_cast<std::size_t>(fit.chosen_iteration));
  fit.model = std::move(model);

  Eigen::VectorXd raw_ps(x.rows());
  for (Index i = 0; i < x.rows(); ++i) raw_ps[i] = expit(best_raw[i]);
  fit.ps = clip_ps(std::move(raw_ps), params.trim, "balance_boost");
  return fit;
}

}  // namespace ateml
