#pragma once

#include "ateml/app/config.hpp"
#include "ateml/selection/selection.hpp"
#include "ateml/superlearner/superlearner.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ateml {

constexpr int kReportSchema = 1;

struct BalanceSummary {
  std::string adjustment;
  double asam_unweighted = 0.0;
  double asam_adjusted = 0.0;
  int flagged_unweighted = 0;
  int flagged_adjusted = 0;
};

struct RunReport {
  RunConfig config;
  Index n = 0;
  Index d = 0;
  Index total_rows = 0;
  Index dropped_rows = 0;
  Index treated = 0;
  std::string outcome_kind;
  std::vector<std::string> covariates;

  std::string method;
  double estimate = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::string se_kind;
  std::vector<std::pair<std::string, double>> diagnostics;

  std::optional<BalanceSummary> balance;
  std::vector<SLWeightTable> sl_tables;
  std::optional<CtmleTrace> ctmle;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> timings;

  std::string to_json(bool include_timings = true) const;
  static RunReport from_json(const std::string& text);

  std::string summary_line() const;
};

// Field-wise equality; NaN compares equal to NaN.
bool same_report(const RunReport& a, const RunReport& b, bool compare_timings = true);

}  // namespace ateml
