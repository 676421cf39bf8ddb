#pragma once

#include "ateml/core/dataset.hpp"
#include "ateml/estimators/estimators.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ateml {

enum class CovariateLaw { normal, bernoulli };

// Normal covariates are standard normal truncated to [-2.5, 2.5], which keeps
// the implied propensity score bounded and checkable at construction.
struct CovariateSpec {
  CovariateLaw law = CovariateLaw::normal;
  double q = 0.5;  // bernoulli success probability
  bool operator==(const CovariateSpec&) const = default;
};

constexpr double kNormalTruncation = 2.5;
constexpr double kPsLower = 0.05;
constexpr double kPsUpper = 0.95;
constexpr int kPopulationDraws = 1000000;

struct DgpSpec {
  std::string name;
  Index n = 2000;
  std::vector<CovariateSpec> covariates;
  double ps_intercept = 0.0;
  std::vector<double> ps_coefficients;   // logit-linear; empty = zeros
  std::vector<double> ps_squares;        // optional x^2 terms on the logit
  double outcome_intercept = 0.0;
  std::vector<double> outcome_coefficients;
  std::vector<double> outcome_squares;   // optional x^2 terms
  double tau = 1.0;
  double noise = 1.0;  // linear outcomes only
  OutcomeKind outcome_kind = OutcomeKind::bounded_continuous;

  Index d() const noexcept { return static_cast<Index>(covariates.size()); }
  void validate() const;
  // Extreme logits of the propensity over the covariate support.
  std::pair<double, double> ps_logit_range() const;
  bool operator==(const DgpSpec&) const = default;
};

struct GeneratedData {
  Dataset data;
  double true_ate = 0.0;
  double true_ate_se = 0.0;  // population Monte Carlo error (binary outcomes)
  Eigen::VectorXd true_ps;
  Eigen::VectorXd y0;
  Eigen::VectorXd y1;
};

struct PopulationAte {
  double ate = 0.0;
  double se = 0.0;
};

// Exact for linear outcomes; population Monte Carlo on a fixed stream for
// binary outcomes (cached per spec).
PopulationAte population_ate(const DgpSpec& spec);

GeneratedData gen_dataset(const DgpSpec& spec, std::uint64_t seed);

const std::vector<DgpSpec>& builtin_specs();
const DgpSpec& builtin_spec(const std::string& name);

struct McRow {
  std::string estimator;
  int replications = 0;
  int failures = 0;
  double true_ate = 0.0;
  double bias = 0.0;
  double mc_se = 0.0;
  double variance = 0.0;  // divisor R, so rmse^2 = bias^2 + variance
  double rmse = 0.0;
  double coverage = 0.0;  // NaN when any replication lacks a usable CI
  double mean_ci_width = 0.0;
  std::vector<double> estimates;
  std::vector<std::string> failure_reasons;
};

struct McReport {
  std::string spec;
  int replications = 0;
  std::vector<McRow> rows;

  std::string to_csv() const;
};

using McEstimator = std::function<AteResult(const GeneratedData&)>;

McRow mc_eval(const McEstimator& estimator, const DgpSpec& spec, int replications, std::uint64_t seed,
              const std::string& name = "estimator");
McReport mc_eval_many(const std::vector<std::pair<std::string, McEstimator>>& estimators, const DgpSpec& spec,
                      int replications, std::uint64_t seed);

}  // namespace ateml
