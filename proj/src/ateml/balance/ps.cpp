#include "ateml/balance/ps.hpp"

#include "ateml/core/error.hpp"

namespace ateml {
namespace {

std::string label_of(const PsConfig& config) {
  switch (config.method) {
    case PsMethod::learner: return config.spec.to_string();
    case PsMethod::super_learner: return "super_learner";
    case PsMethod::balance_boost: return "balance_boost";
  }
  return "unknown";
}

}  // namespace

Eigen::VectorXd predict_ps(const PsConfig& config, const Eigen::MatrixXd& x, const Eigen::VectorXd& a,
                           const Eigen::MatrixXd& x_eval, std::vector<std::string>* warnings,
                           std::vector<SLWeightTable>* tables) {
  switch (config.method) {
    case PsMethod::learner: {
      const ModelPtr model = fit_learner(config.spec, x, a, TargetKind::probability);
      if (warnings) warnings->insert(warnings->end(), model->info().warnings.begin(), model->info().warnings.end());
      return model->predict(x_eval);
    }
    case PsMethod::super_learner: {
      const SLLibrary library = config.library.candidates.empty() ? fast_library(TargetKind::probability)
                                                                  : config.library;
      const auto model = fit_super_learner(library, x, a, config.sl_folds, config.seed, config.sl_loss,
                                           TargetKind::probability);
      if (warnings) warnings->insert(warnings->end(), model->info().warnings.begin(), model->info().warnings.end());
      if (tables) tables->push_back(weight_table(*model, "ps"));
      return model->predict(x_eval);
    }
    case PsMethod::balance_boost: {
      BoostedBalanceParams params = config.boosted;
      params.trim = config.trim;
      const Dataset train(x, default_names(x.cols()), a, Eigen::VectorXd::Zero(x.rows()));
      return boosted_balance_ps(train, params).model.predict(x_eval);
    }
  }
  throw InvalidArgument("balance", "unknown propensity method");
}

PsFit estimate_ps(const PsConfig& config, const Dataset& data) {
  if (!(config.trim > 0.0 && config.trim < 0.5)) throw InvalidArgument("balance", "trim must lie in (0, 0.5)");
  if (config.method == PsMethod::balance_boost) {
    BoostedBalanceParams params = config.boosted;
    params.trim = config.trim;
    return boosted_balance_ps(data, params).ps;
  }
  std::vector<std::string> warnings;
  Eigen::VectorXd raw = predict_ps(config, data.covariates(), data.treatment(), data.covariates(), &warnings);
  PsFit fit = clip_ps(std::move(raw), config.trim, label_of(config));
  fit.warnings.insert(fit.warnings.begin(), warnings.begin(), warnings.end());
  return fit;
}

PsFit estimate_ps(const LearnerSpec& spec, const Dataset& data, double trim) {
  PsConfig config;
  config.spec = spec;
  config.trim = trim;
  return estimate_ps(config, data);
}

}  // namespace ateml
