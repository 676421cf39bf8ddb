#include "ateml/core/error.hpp"
#include "ateml/core/parallel.hpp"
#include "ateml/core/rng.hpp"
#include "ateml/core/stats.hpp"
#include "ateml/estimators/estimators.hpp"

#include <cmath>

namespace ateml {
namespace {

constexpr int kSplitAttempts = 10;

bool both_arms_everywhere(const FoldAssignment& folds, const Eigen::VectorXd& a) {
  std::vector<int> treated(static_cast<std::size_t>(folds.folds), 0), control(treated.size(), 0);
  for (std::size_t i = 0; i < folds.fold_of.size(); ++i)
    (a[static_cast<Index>(i)] == 1.0 ? treated : control)[static_cast<std::size_t>(folds.fold_of[i])]++;
  const int n1 = static_cast<int>(a.sum());
  const int n0 = static_cast<int>(a.size()) - n1;
  for (std::size_t f = 0; f < treated.size(); ++f)
    if (treated[f] == 0 || control[f] == 0 || treated[f] == n1 || control[f] == n0) return false;
  return true;
}

FoldAssignment dml_folds(const Dataset& data, int k, std::uint64_t seed) {
  for (int attempt = 0; attempt < kSplitAttempts; ++attempt) {
    FoldAssignment folds = make_folds(data.rows(), k, mix64(seed + static_cast<std::uint64_t>(attempt)));
    if (both_arms_everywhere(folds, data.treatment())) return folds;
  }
  throw FitError("estimators", "dml: could not draw a split with both arms in every fold after 10 attempts");
}

double aggregate(std::vector<double> values, Aggregate how) {
  if (how == Aggregate::median) return median(std::move(values));
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

}  // namespace

AteResult dml_ate(const Dataset& data, const DmlConfig& config) {
  if (config.folds < 2) throw InvalidArgument("estimators", "dml: K must be at least 2");
  if (config.repetitions < 1) throw InvalidArgument("estimators", "dml: S must be at least 1");
  if (config.folds > data.rows()) throw InvalidArgument("estimators", "dml: more folds than rows");

  const std::size_t reps = static_cast<std::size_t>(config.repetitions);
  std::vector<AteResult> runs(reps);
  parallel_for(reps, [&](std::size_t s) {
    const std::uint64_t rep = config.identical_seeds ? 0 : s;
    const std::uint64_t seed = mix64(config.seed ^ (0xd31ULL + rep));
    NuisanceConfig nc = config.nuisance;
    nc.seed = seed;
    NuisanceFits fits = config.disable_splitting ? fit_nuisances(nc, data)
                                                 : cross_fit_nuisances(nc, data, dml_folds(data, config.folds, seed));
    runs[s] = aiptw_ate(data, fits);
  });

  if (reps == 1) {
    AteResult r = std::move(runs[0]);
    r.method = "dml";
    r.diagnostics.emplace_back("folds", config.folds);
    r.diagnostics.emplace_back("repetitions", 1.0);
    return r;
  }

  std::vector<double> estimates, ses;
  for (const auto& run : runs) estimates.push_back(run.estimate);
  AteResult r;
  r.method = "dml";
  r.estimate = aggregate(estimates, config.aggregate);
  std::vector<double> spread;
  for (const auto& run : runs) spread.push_back(run.se * run.se + (run.estimate - r.estimate) * (run.estimate - r.estimate));
  r.if_values = Eigen::VectorXd::Zero(data.rows());
  for (const auto& run : runs) r.if_values += run.if_values;
  r.if_values /= static_cast<double>(reps);
  r.set_if_interval(std::sqrt(aggregate(spread, config.aggregate)));
  r.diagnostics.emplace_back("folds", config.folds);
  r.diagnostics.emplace_back("repetitions", static_cast<double>(reps));
  r.diagnostics.emplace_back("estimate_min", *std::min_element(estimates.begin(), estimates.end()));
  r.diagnostics.emplace_back("estimate_max", *std::max_element(estimates.begin(), estimates.end()));
  r.diagnostics.emplace_back("cross_fitted", config.disable_splitting ? 0.0 : 1.0);
  for (const auto& run : runs) r.warnings.insert(r.warnings.end(), run.warnings.begin(), run.warnings.end());
  return r;
}

}  // namespace ateml
