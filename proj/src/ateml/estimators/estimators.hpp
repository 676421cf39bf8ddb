#pragma once

#include "ateml/balance/matching.hpp"
#include "ateml/core/dataset.hpp"
#include "ateml/estimators/nuisance.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace ateml {

enum class SeKind { influence_function, analytic, bootstrap, none };
std::string_view to_string(SeKind kind) noexcept;

struct AteResult {
  std::string method;
  double estimate = 0.0;
  double se = 0.0;  // NaN when not available
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  SeKind se_kind = SeKind::none;
  Eigen::VectorXd if_values;  // empty when undefined for the method
  std::vector<std::pair<std::string, double>> diagnostics;
  std::vector<std::string> warnings;

  double diagnostic(const std::string& key) const;  // NaN when absent
  void set_if_interval(double se_value);  // ci = estimate -/+ z * se
};

// sqrt(var(phi) / N) with the N-1 variance divisor.
double if_se(const Eigen::VectorXd& phi);

AteResult naive_ate(const Dataset& data);
AteResult reg_ate(const Dataset& data, const NuisanceFits& fits);
AteResult iptw_ate(const Dataset& data, const Eigen::VectorXd& ps);
AteResult match_ate(const Dataset& data, const MatchResult& matches);
AteResult aiptw_ate(const Dataset& data, const NuisanceFits& fits);

constexpr double kTmleEpsilonLimit = 50.0;
AteResult tmle_ate(const Dataset& data, const NuisanceFits& initial);

struct TmleUpdate {
  double epsilon = 0.0;
  int iterations = 0;
  double score = 0.0;  // mean h (Y - mu*) on the outcome scale
  Eigen::VectorXd mu1, mu0, mu_observed;
};
// Logistic fluctuation of the initial fits (outcome scale in, outcome scale out).
TmleUpdate tmle_fluctuate(const Dataset& data, const Eigen::VectorXd& ps, const Eigen::VectorXd& mu1,
                          const Eigen::VectorXd& mu0);
// Applies a known epsilon to predictions at new rows.
void tmle_apply(double epsilon, double lo, double hi, const Eigen::VectorXd& ps, Eigen::VectorXd& mu1,
                Eigen::VectorXd& mu0);

enum class Aggregate { mean, median };

struct DmlConfig {
  int folds = 2;
  int repetitions = 11;
  Aggregate aggregate = Aggregate::median;
  NuisanceConfig nuisance;
  std::uint64_t seed = 0;
  // Test hooks.
  bool disable_splitting = false;
  bool identical_seeds = false;
};

AteResult dml_ate(const Dataset& data, const DmlConfig& config);

struct BootstrapResult {
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<double> estimates;  // successful resamples, by index
  int failures = 0;
};

constexpr int kDefaultBootstrap = 999;
using EstimatorClosure = std::function<double(const Dataset&)>;

BootstrapResult bootstrap_ci(const EstimatorClosure& estimator, const Dataset& data, int replicates,
                             std::uint64_t seed);

// Replaces se/ci of `result` with bootstrap values.
void attach_bootstrap(AteResult& result, const BootstrapResult& boot);

}  // namespace ateml
