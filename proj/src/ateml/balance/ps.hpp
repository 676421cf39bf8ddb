#pragma once

#include "ateml/balance/balance.hpp"
#include "ateml/balance/boosted_ps.hpp"
#include "ateml/core/learner.hpp"
#include "ateml/superlearner/superlearner.hpp"

namespace ateml {

enum class PsMethod { learner, super_learner, balance_boost };

struct PsConfig {
  PsMethod method = PsMethod::learner;
  LearnerSpec spec = LearnerSpec::defaults(LearnerFamily::logistic);
  SLLibrary library;
  int sl_folds = kDefaultFolds;
  Loss sl_loss = Loss::mse;
  std::uint64_t seed = 0;
  BoostedBalanceParams boosted;
  double trim = kDefaultTrim;
};

// Full-sample propensity model for A given X.
PsFit estimate_ps(const PsConfig& config, const Dataset& data);
PsFit estimate_ps(const LearnerSpec& spec, const Dataset& data, double trim = kDefaultTrim);

// Fits the configured PS model on `x`, `a` and predicts rows of `x_eval`.
Eigen::VectorXd predict_ps(const PsConfig& config, const Eigen::MatrixXd& x, const Eigen::VectorXd& a,
                           const Eigen::MatrixXd& x_eval, std::vector<std::string>* warnings = nullptr,
                           std::vector<SLWeightTable>* tables = nullptr);

}  // namespace ateml
