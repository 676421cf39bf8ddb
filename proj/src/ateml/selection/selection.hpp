#pragma once

#include "ateml/balance/balance.hpp"
#include "ateml/core/dataset.hpp"
#include "ateml/estimators/estimators.hpp"

#include <limits>
#include <string>
#include <vector>

namespace ateml {

struct ExpandedCovariates {
  Eigen::MatrixXd x;
  std::vector<std::string> names;
};

// Appends non-constant pairwise products named "a:b", ordered by source pair.
ExpandedCovariates expand_interactions(const Eigen::MatrixXd& x, const std::vector<std::string>& names);

struct SelectionResult {
  std::vector<Index> outcome_selected;
  std::vector<Index> treatment_selected;
  std::vector<Index> forced_in;
  std::vector<Index> union_set;  // sorted
};

struct DoubleLassoConfig {
  int folds = kDefaultFolds;
  std::uint64_t seed = 0;
  std::vector<Index> forced_in;
  bool logistic_treatment = false;
};

SelectionResult double_lasso_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& a, const Eigen::VectorXd& y,
                                    const DoubleLassoConfig& config = {});

enum class PostMethod { reg, iptw, aiptw };
std::string_view to_string(PostMethod method) noexcept;
PostMethod parse_post_method(std::string_view text);

// Parametric nuisances on the selected columns; empty selection falls back
// to the naive difference in means.
AteResult post_double_ate(const Dataset& data, const SelectionResult& selection, PostMethod method,
                          double trim = kDefaultTrim);

// Selection followed by post_double_ate; suitable as a bootstrap closure.
AteResult double_lasso_ate(const Dataset& data, PostMethod method, const DoubleLassoConfig& config = {},
                           double trim = kDefaultTrim);

enum class CtmleVariant { greedy, logistic, correlation, lasso };
std::string_view to_string(CtmleVariant variant) noexcept;

struct CtmleCandidate {
  std::vector<Index> covariates;  // PS covariate set (active set for lasso)
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double cv_loss = 0.0;
  double empirical_loss = 0.0;
  double estimate = 0.0;
  bool restarted = false;  // greedy: accepted after replacing the initial fit
};

struct CtmleTrace {
  CtmleVariant variant = CtmleVariant::greedy;
  std::vector<CtmleCandidate> candidates;
  std::size_t chosen = 0;
  std::vector<Index> order;  // pre-ordered variants
  std::vector<double> order_score;
  int ps_fits = 0;  // greedy: full-sample candidate PS fits with at least one covariate
  int restarts = 0;

  std::string to_csv(const std::vector<std::string>& names) const;
};

struct CtmleConfig {
  int folds = kDefaultFolds;
  std::uint64_t seed = 0;
  double trim = kDefaultTrim;
  int patience = 1;  // pre-ordered stop rule
  std::vector<double> lambda_path;  // lasso variant; empty = default path
  int path_length = 10;
  double path_ratio = 0.75;
};

struct CtmleResult {
  AteResult ate;
  CtmleTrace trace;
};

CtmleResult ctmle_greedy(const Dataset& data, const NuisanceFits& initial, const CtmleConfig& config = {});
CtmleResult ctmle_preorder_logistic(const Dataset& data, const NuisanceFits& initial, const CtmleConfig& config = {});
CtmleResult ctmle_preorder_correlation(const Dataset& data, const NuisanceFits& initial,
                                       const CtmleConfig& config = {});
CtmleResult ctmle_lasso(const Dataset& data, const NuisanceFits& initial, const CtmleConfig& config = {});
CtmleResult run_ctmle(CtmleVariant variant, const Dataset& data, const NuisanceFits& initial,
                      const CtmleConfig& config = {});

}  // namespace ateml
