#pragma once

#include "ateml/app/config.hpp"
#include "ateml/app/csv.hpp"
#include "ateml/app/report.hpp"
#include "ateml/dgp/dgp.hpp"
#include "ateml/estimators/estimators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ateml {

NuisanceConfig nuisance_config(const RunConfig& config, const Dataset& data);

struct Estimation {
  AteResult ate;
  std::optional<CtmleTrace> trace;
  std::vector<SLWeightTable> tables;
  std::optional<BalanceAdjustment> balance_weights;
};

// One pass of the configured estimator, without bootstrap.
Estimation estimate_once(const RunConfig& config, const Dataset& data);

// Estimation plus bootstrap and reporting on an in-memory dataset.
RunReport run_on_dataset(const RunConfig& config, const Dataset& data, Index total_rows = -1,
                         Index dropped_rows = 0);

// Ingests config.data, writes the report to config.out when it is set.
RunReport run(const RunConfig& config);

extern const std::vector<std::string> kAdjustmentIds;
std::string balance_cmd(const RunConfig& config, const std::vector<std::string>& adjustments);

DgpSpec load_dgp_spec(const std::string& name_or_path);
std::string dgp_spec_to_json(const DgpSpec& spec);

std::string simulate_cmd(const std::string& spec, const std::vector<std::string>& estimators, int replications,
                         std::uint64_t seed, const RunConfig& base = {});

std::string export_dgp(const std::string& spec, std::uint64_t seed, Index n = 0);

}  // namespace ateml
