#pragma once

#include "ateml/balance/ps.hpp"
#include "ateml/core/dataset.hpp"
#include "ateml/core/folds.hpp"
#include "ateml/core/learner.hpp"
#include "ateml/superlearner/superlearner.hpp"

#include <string>
#include <vector>

namespace ateml {

struct OutcomeConfig {
  bool super_learner = false;
  LearnerSpec spec = LearnerSpec::defaults(LearnerFamily::ols);
  SLLibrary library;  // empty selects fast_library()
  int sl_folds = kDefaultFolds;
  Loss sl_loss = Loss::mse;
  bool separate_arms = true;  // false fits one model on (X, A)
};

struct NuisanceConfig {
  PsConfig ps;
  OutcomeConfig outcome;
  std::vector<Index> ps_columns;       // empty = all covariates
  std::vector<Index> outcome_columns;  // empty = all covariates
  std::uint64_t seed = 0;
};

enum class Provenance { full_sample, cross_fitted };

struct NuisanceFits {
  Eigen::VectorXd ps;
  Eigen::VectorXd mu1;
  Eigen::VectorXd mu0;
  Provenance provenance = Provenance::full_sample;
  std::vector<int> fold_of;  // cross_fitted only
  double clipped_fraction = 0.0;
  std::vector<std::string> warnings;
  std::vector<SLWeightTable> sl_tables;  // one per super learner fit

  bool has_ps() const noexcept { return ps.size() > 0; }
  bool has_outcome() const noexcept { return mu1.size() > 0 && mu0.size() > 0; }
};

std::string_view to_string(Provenance provenance) noexcept;

NuisanceFits fit_nuisances(const NuisanceConfig& config, const Dataset& data);
NuisanceFits cross_fit_nuisances(const NuisanceConfig& config, const Dataset& data, const FoldAssignment& folds);

}  // namespace ateml
