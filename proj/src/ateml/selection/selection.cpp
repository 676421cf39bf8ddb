#include "ateml/selection/selection.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/stats.hpp"
#include "ateml/learners/lasso.hpp"
#include "ateml/learners/logistic_lasso.hpp"

#include <algorithm>
#include <iterator>

namespace ateml {

ExpandedCovariates expand_interactions(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
  if (x.cols() < 1) throw InvalidArgument("selection", "expand_interactions: no columns");
  const std::vector<std::string> base = names.empty() ? default_names(x.cols()) : names;
  if (static_cast<Index>(base.size()) != x.cols())
    throw InvalidArgument("selection", "expand_interactions: names do not match columns");
  const InteractionExpansion expansion(x);
  ExpandedCovariates out{expansion.apply(x), base};
  for (const auto& [l, r] : expansion.pairs())
    out.names.push_back(base[static_cast<std::size_t>(l)] + ":" + base[static_cast<std::size_t>(r)]);
  return out;
}

SelectionResult double_lasso_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& a, const Eigen::VectorXd& y,
                                    const DoubleLassoConfig& config) {
  if (x.rows() != a.size() || x.rows() != y.size())
    throw InvalidArgument("selection", "double_lasso_select: length mismatch");
  for (Index c : config.forced_in)
    if (c < 0 || c >= x.cols()) throw InvalidArgument("selection", "forced covariate index out of range");
  SelectionResult out;
  const FoldAssignment folds = make_folds(x.rows(), config.folds, config.seed);
  out.outcome_selected = lasso_cv(x, y, {}, folds).fit.active_set;
  if (config.logistic_treatment) {
    const FoldAssignment strat = make_stratified_folds(a, config.folds, config.seed);
    out.treatment_selected = logistic_lasso_cv(x, a, {}, strat).fit.active_set;
  } else {
    out.treatment_selected = lasso_cv(x, a, {}, folds).fit.active_set;
  }
  out.forced_in = config.forced_in;
  std::sort(out.forced_in.begin(), out.forced_in.end());
  out.forced_in.erase(std::unique(out.forced_in.begin(), out.forced_in.end()), out.forced_in.end());

  std::vector<Index> both;
  std::set_union(out.outcome_selected.begin(), out.outcome_selected.end(), out.treatment_selected.begin(),
                 out.treatment_selected.end(), std::back_inserter(both));
  std::set_union(both.begin(), both.end(), out.forced_in.begin(), out.forced_in.end(),
                 std::back_inserter(out.union_set));
  return out;
}

std::string_view to_string(PostMethod method) noexcept {
  switch (method) {
    case PostMethod::reg: return "reg";
    case PostMethod::iptw: return "iptw";
    case PostMethod::aiptw: return "aiptw";
  }
  return "aiptw";
}

PostMethod parse_post_method(std::string_view text) {
  if (text == "reg") return PostMethod::reg;
  if (text == "iptw") return PostMethod::iptw;
  if (text == "aiptw") return PostMethod::aiptw;
  throw InvalidArgument("selection", "unknown post-selection method '" + std::string(text) + "'");
}

AteResult post_double_ate(const Dataset& data, const SelectionResult& selection, PostMethod method, double trim) {
  if (selection.union_set.empty()) {
    AteResult r = naive_ate(data);
    r.method = "double_lasso_" + std::string(to_string(method));
    r.warnings.push_back("double lasso: empty adjustment set, reporting the naive difference in means");
    r.diagnostics.emplace_back("selected", 0.0);
    return r;
  }
  NuisanceConfig config;
  config.ps.spec = LearnerSpec::defaults(LearnerFamily::logistic);
  config.ps.trim = trim;
  config.outcome.spec = LearnerSpec::defaults(data.outcome_kind() == OutcomeKind::binary ? LearnerFamily::logistic
                                                                                          : LearnerFamily::ols);
  config.ps_columns = selection.union_set;
  config.outcome_columns = selection.union_set;
  const NuisanceFits fits = fit_nuisances(config, data);
  AteResult r;
  switch (method) {
    case PostMethod::reg: r = reg_ate(data, fits); break;
    case PostMethod::iptw:
      r = iptw_ate(data, fits.ps);
      r.warnings.insert(r.warnings.end(), fits.warnings.begin(), fits.warnings.end());
      break;
    case PostMethod::aiptw: r = aiptw_ate(data, fits); break;
  }
  r.method = "double_lasso_" + std::string(to_string(method));
  r.diagnostics.emplace_back("selected", static_cast<double>(selection.union_set.size()));
  return r;
}

AteResult double_lasso_ate(const Dataset& data, PostMethod method, const DoubleLassoConfig& config, double trim) {
  const SelectionResult sel = double_lasso_select(data.covariates(), data.treatment(), data.outcome(), config);
  return post_double_ate(data, sel, method, trim);
}

}  // namespace ateml
