#pragma once

#include "ateml/core/dataset.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace ateml {

constexpr double kDefaultTrim = 0.01;
constexpr double kImbalanceFlag = 0.1;

struct PsFit {
  Eigen::VectorXd ps;      // clipped to [trim, 1 - trim]
  Eigen::VectorXd raw_ps;
  double trim = kDefaultTrim;
  double clipped_fraction = 0.0;
  bool positivity_warning = false;  // clipped_fraction > 0.1
  std::string learner;
  std::vector<std::string> warnings;
};

PsFit clip_ps(Eigen::VectorXd raw, double trim, std::string learner);

enum class WeightNormalization { none, mean_one_per_arm };

struct WeightVector {
  Eigen::VectorXd w;
  WeightNormalization normalization = WeightNormalization::none;
};

WeightVector iptw_weights(const Eigen::VectorXd& ps, const Eigen::VectorXd& a,
                          WeightNormalization normalization = WeightNormalization::none);
WeightVector iptw_weights(const PsFit& ps, const Eigen::VectorXd& a,
                          WeightNormalization normalization = WeightNormalization::none);

// Standardized mean difference with the unweighted pooled per-arm SD in the
// denominator. nullopt marks a constant covariate whose arm means differ.
std::optional<double> smd(const Eigen::VectorXd& x, const Eigen::VectorXd& a,
                          const Eigen::VectorXd* w = nullptr);

struct AsamResult {
  double value = 0.0;
  std::vector<Index> degenerate;
};

AsamResult asam_detail(const Eigen::MatrixXd& x, const Eigen::VectorXd& a, const Eigen::VectorXd* w = nullptr);
double asam(const Eigen::MatrixXd& x, const Eigen::VectorXd& a, const Eigen::VectorXd* w = nullptr);

struct BalanceAdjustment {
  std::string label;
  Eigen::VectorXd weights;
};

struct BalanceReport {
  std::vector<std::string> covariates;
  std::vector<std::string> labels;                         // "unweighted" first
  std::vector<std::vector<std::optional<double>>> smd;     // [covariate][label]
  std::vector<double> asam;                                // per label

  std::size_t flagged(std::size_t label) const;
  std::string to_csv() const;
};

BalanceReport balance_table(const Dataset& data, const std::vector<BalanceAdjustment>& adjustments);

}  // namespace ateml
