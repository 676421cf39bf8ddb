#pragma once

#include "ateml/core/folds.hpp"
#include "ateml/core/learner.hpp"
#include "ateml/core/loss.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace ateml {

struct SLLibrary {
  std::vector<LearnerSpec> candidates;
  std::vector<std::string> names;

  // Names default to each spec's string form; repeats get a "#k" suffix.
  static SLLibrary from_specs(std::vector<LearnerSpec> specs);
  void validate() const;
  std::size_t size() const noexcept { return candidates.size(); }
};

// Logistic/ols with and without interactions, four forests, eight boosting
// configurations and a depth-3 boosting entry. Forest mtry is capped at d.
SLLibrary default_library(Eigen::Index d, TargetKind kind);
// Small library for routine nuisance fitting.
SLLibrary fast_library(TargetKind kind);

Eigen::MatrixXd level_one(const SLLibrary& library, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const FoldAssignment& folds, TargetKind kind = TargetKind::regression);

struct MetaWeights {
  Eigen::VectorXd weights;
  bool fallback = false;  // uniform weights used because the solver failed
};

MetaWeights meta_weights(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, Loss loss);

class SLModel final : public FittedModel {
 public:
  SLModel(SLLibrary library, Eigen::VectorXd weights, std::vector<ModelPtr> models, FoldAssignment folds,
          Eigen::VectorXd level_one_risk, TargetKind kind, FitInfo info);

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override;

  const SLLibrary& library() const noexcept { return library_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  const std::vector<ModelPtr>& models() const noexcept { return models_; }
  const FoldAssignment& folds() const noexcept { return folds_; }
  const Eigen::VectorXd& level_one_risk() const noexcept { return level_one_risk_; }

 private:
  SLLibrary library_;
  Eigen::VectorXd weights_;
  std::vector<ModelPtr> models_;
  FoldAssignment folds_;
  Eigen::VectorXd level_one_risk_;
};

using SLModelPtr = std::shared_ptr<const SLModel>;

struct SLWeightTable {
  std::string role;
  std::vector<std::string> names;
  std::vector<double> weights;
  std::vector<double> cv_risk;
  bool operator==(const SLWeightTable&) const = default;
};

SLWeightTable weight_table(const SLModel& model, std::string role);

SLModelPtr fit_super_learner(const SLLibrary& library, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             int folds, std::uint64_t seed, Loss loss,
                             TargetKind kind = TargetKind::regression);

struct SLRiskReport {
  std::vector<std::string> names;
  std::vector<double> candidate_risk;
  double discrete_risk = 0.0;
  double super_risk = 0.0;

  std::string to_csv() const;
};

// 0-based index of the smallest risk; ties go to the lowest index.
std::size_t discrete_sl(const std::vector<double>& risks);
std::size_t discrete_sl(const SLRiskReport& report);

SLRiskReport sl_risk_report(const SLLibrary& library, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            int outer_folds, int inner_folds, std::uint64_t seed, Loss loss = Loss::mse,
                            TargetKind kind = TargetKind::regression);

}  // namespace ateml
