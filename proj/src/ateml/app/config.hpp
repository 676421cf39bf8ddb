#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ateml {

// Flat "key = value" run configuration. Later lines override earlier ones,
// so command-line flags are applied by appending them.
struct RunConfig {
  std::string data;
  std::string treatment = "A";
  std::string outcome = "Y";
  std::vector<std::string> covariates;  // empty = all other columns
  std::string estimator = "aiptw";
  std::string ps_learner = "logistic";  // learner spec, "sl", "sl_default" or "balance_boost"
  std::string outcome_learner = "ols";  // learner spec, "sl" or "sl_default"
  bool joint_outcome = false;
  int v_folds = 10;
  std::uint64_t seed = 1;
  int bootstrap = 0;  // 0 = only where the estimator has no analytic se
  double trim = 0.01;
  int dml_k = 2;
  int dml_s = 11;
  std::string dml_aggregate = "median";
  std::string post_method = "aiptw";
  std::string out = "report.json";
  int threads = 0;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

extern const std::vector<std::string> kEstimatorIds;

RunConfig parse_run_config(const std::string& text, RunConfig base = {});
std::string serialize_run_config(const RunConfig& config);

}  // namespace ateml
