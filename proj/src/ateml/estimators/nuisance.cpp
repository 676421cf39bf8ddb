#include "ateml/estimators/nuisance.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/parallel.hpp"
#include "ateml/core/rng.hpp"

#include <numeric>

namespace ateml {
namespace {

std::vector<Index> all_columns(Index d) {
  std::vector<Index> cols(static_cast<std::size_t>(d));
  std::iota(cols.begin(), cols.end(), Index{0});
  return cols;
}

Eigen::MatrixXd columns(const Eigen::MatrixXd& x, const std::vector<Index>& cols) {
  return cols.empty() ? x : take_cols(x, cols);
}

void check_columns(const std::vector<Index>& cols, Index d, const char* what) {
  for (Index c : cols)
    if (c < 0 || c >= d) throw InvalidArgument("estimators", std::string(what) + " column index out of range");
}

TargetKind outcome_target(const Dataset& data) {
  return data.outcome_kind() == OutcomeKind::binary ? TargetKind::probability : TargetKind::regression;
}

Eigen::VectorXd fit_predict(const OutcomeConfig& oc, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            TargetKind kind, const Eigen::MatrixXd& x_eval, std::uint64_t seed,
                            std::vector<std::string>& warnings, std::vector<SLWeightTable>& tables,
                            const std::string& role) {
  if (kind == TargetKind::probability && (y.minCoeff() == y.maxCoeff())) {
    warnings.push_back("outcome: constant binary outcome in a fitting arm, using its mean");
    return Eigen::VectorXd::Constant(x_eval.rows(), y[0]);
  }
  if (oc.super_learner) {
    const SLLibrary lib = oc.library.candidates.empty() ? fast_library(kind) : oc.library;
    const auto model = fit_super_learner(lib, x, y, oc.sl_folds, seed, oc.sl_loss, kind);
    warnings.insert(warnings.end(), model->info().warnings.begin(), model->info().warnings.end());
    tables.push_back(weight_table(*model, role));
    return model->predict(x_eval);
  }
  const ModelPtr model = fit_learner(oc.spec, x, y, kind);
  warnings.insert(warnings.end(), model->info().warnings.begin(), model->info().warnings.end());
  return model->predict(x_eval);
}

struct Predictions {
  Eigen::VectorXd ps, mu1, mu0;
  std::vector<std::string> warnings;
  std::vector<SLWeightTable> tables;
};

Predictions predict_all(const NuisanceConfig& config, const Dataset& data, std::span<const Index> train,
                        std::span<const Index> eval, std::uint64_t seed) {
  const Eigen::MatrixXd& x = data.covariates();
  const Eigen::VectorXd& a = data.treatment();
  const Eigen::VectorXd& y = data.outcome();
  Predictions out;

  PsConfig ps_config = config.ps;
  ps_config.seed = mix64(seed ^ 0x7073ULL);
  const Eigen::MatrixXd xps = columns(x, config.ps_columns);
  const Eigen::VectorXd raw =
      predict_ps(ps_config, take_rows(xps, train), take(a, train), take_rows(xps, eval), &out.warnings, &out.tables);
  out.ps = raw;

  const Eigen::MatrixXd xo = columns(x, config.outcome_columns);
  const TargetKind kind = outcome_target(data);
  const std::uint64_t oseed = mix64(seed ^ 0x6f7574ULL);
  const Eigen::MatrixXd xo_eval = take_rows(xo, eval);
  if (config.outcome.separate_arms) {
    std::vector<Index> arm[2];
    for (Index i : train) arm[a[i] == 1.0 ? 1 : 0].push_back(i);
    if (arm[0].empty() || arm[1].empty())
      throw FitError("estimators", "outcome model: a treatment arm is empty in the training rows");
    out.mu1 = fit_predict(config.outcome, take_rows(xo, arm[1]), take(y, arm[1]), kind, xo_eval, oseed, out.warnings, out.tables,
                          "outcome_treated");
    out.mu0 = fit_predict(config.outcome, take_rows(xo, arm[0]), take(y, arm[0]), kind, xo_eval,
                          mix64(oseed + 1), out.warnings, out.tables, "outcome_control");
  } else {
    Eigen::MatrixXd xa(xo.rows(), xo.cols() + 1);
    xa << xo, a;
    Eigen::MatrixXd eval1(xo_eval.rows(), xo.cols() + 1), eval0(xo_eval.rows(), xo.cols() + 1);
    eval1 << xo_eval, Eigen::VectorXd::Ones(xo_eval.rows());
    eval0 << xo_eval, Eigen::VectorXd::Zero(xo_eval.rows());
    Eigen::MatrixXd stacked(2 * xo_eval.rows(), xo.cols() + 1);
    stacked << eval1, eval0;
    const Eigen::VectorXd both =
        fit_predict(config.outcome, take_rows(xa, train), take(y, train), kind, stacked, oseed, out.warnings, out.tables, "outcome");
    out.mu1 = both.head(xo_eval.rows());
    out.mu0 = both.tail(xo_eval.rows());
  }
  const double lo = data.outcome_lo(), hi = data.outcome_hi();
  out.mu1 = out.mu1.cwiseMax(lo).cwiseMin(hi);
  out.mu0 = out.mu0.cwiseMax(lo).cwiseMin(hi);
  return out;
}

}  // namespace

std::string_view to_string(Provenance provenance) noexcept {
  return provenance == Provenance::full_sample ? "full_sample" : "cross_fitted";
}

NuisanceFits fit_nuisances(const NuisanceConfig& config, const Dataset& data) {
  check_columns(config.ps_columns, data.cols(), "ps");
  check_columns(config.outcome_columns, data.cols(), "outcome");
  NuisanceFits fits;
  fits.provenance = Provenance::full_sample;
  if (config.ps.method == PsMethod::balance_boost) {
    // The balance criterion is evaluated on the columns the PS model sees.
    const Dataset sub = config.ps_columns.empty() ? data : data.select_columns(config.ps_columns);
    PsConfig ps_config = config.ps;
    const PsFit ps = estimate_ps(ps_config, sub);
    fits.ps = ps.ps;
    fits.clipped_fraction = ps.clipped_fraction;
    fits.warnings = ps.warnings;
    NuisanceConfig outcome_only = config;
    outcome_only.ps.method = PsMethod::learner;
    outcome_only.ps.spec = LearnerSpec::defaults(LearnerFamily::mean);
    const auto rows = all_columns(data.rows());
    Predictions p = predict_all(outcome_only, data, rows, rows, config.seed);
    fits.mu1 = std::move(p.mu1);
    fits.mu0 = std::move(p.mu0);
    fits.sl_tables = std::move(p.tables);
    return fits;
  }
  const auto rows = all_columns(data.rows());
  Predictions p = predict_all(config, data, rows, rows, config.seed);
  const PsFit ps = clip_ps(std::move(p.ps), config.ps.trim, "");
  fits.ps = ps.ps;
  fits.clipped_fraction = ps.clipped_fraction;
  fits.mu1 = std::move(p.mu1);
  fits.mu0 = std::move(p.mu0);
  fits.warnings = std::move(p.warnings);
  fits.sl_tables = std::move(p.tables);
  fits.warnings.insert(fits.warnings.end(), ps.warnings.begin(), ps.warnings.end());
  return fits;
}

NuisanceFits cross_fit_nuisances(const NuisanceConfig& config, const Dataset& data, const FoldAssignment& folds) {
  check_columns(config.ps_columns, data.cols(), "ps");
  check_columns(config.outcome_columns, data.cols(), "outcome");
  if (folds.size() != data.rows()) throw InvalidArgument("estimators", "cross_fit_nuisances: fold map length");
  const Index n = data.rows();
  Eigen::VectorXd raw(n), mu1(n), mu0(n);
  std::vector<std::vector<std::string>> warnings(static_cast<std::size_t>(folds.folds));
  std::vector<std::vector<SLWeightTable>> tables(warnings.size());
  parallel_for(static_cast<std::size_t>(folds.folds), [&](std::size_t f) {
    const int fold = static_cast<int>(f);
    const auto train = folds.training_rows(fold);
    const auto test = folds.holdout_rows(fold);
    Predictions p = predict_all(config, data, train, test, mix64(config.seed + 0x1000 * (f + 1)));
    for (std::size_t r = 0; r < test.size(); ++r) {
      const Index i = test[r];
      raw[i] = p.ps[static_cast<Index>(r)];
      mu1[i] = p.mu1[static_cast<Index>(r)];
      mu0[i] = p.mu0[static_cast<Index>(r)];
    }
    warnings[f] = std::move(p.warnings);
    for (auto& t : p.tables) t.role += "_fold" + std::to_string(f + 1);
    tables[f] = std::move(p.tables);
  });
  NuisanceFits fits;
  const PsFit ps = clip_ps(std::move(raw), config.ps.trim, "");
  fits.ps = ps.ps;
  fits.clipped_fraction = ps.clipped_fraction;
  fits.mu1 = std::move(mu1);
  fits.mu0 = std::move(mu0);
  fits.provenance = Provenance::cross_fitted;
  fits.fold_of = folds.fold_of;
  for (auto& w : warnings) fits.warnings.insert(fits.warnings.end(), w.begin(), w.end());
  for (auto& t : tables) fits.sl_tables.insert(fits.sl_tables.end(), t.begin(), t.end());
  fits.warnings.insert(fits.warnings.end(), ps.warnings.begin(), ps.warnings.end());
  return fits;
}

}  // namespace ateml
