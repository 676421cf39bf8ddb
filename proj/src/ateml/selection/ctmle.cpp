#include "ateml/core/error.hpp"
#include "ateml/core/parallel.hpp"
#include "ateml/core/stats.hpp"
#include "ateml/learners/linear.hpp"
#include "ateml/learners/logistic_lasso.hpp"
#include "ateml/selection/selection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace ateml {
namespace {

// Propensity scores for every row from models trained on each fold's
// training rows, plus the full-sample fit.
struct PsBank {
  std::vector<Eigen::VectorXd> fold;
  Eigen::VectorXd full;
  std::vector<Index> active;  // lasso: full-sample active set
};

struct Initial {
  Eigen::VectorXd mu1, mu0;
};

struct Evaluation {
  double cv_loss = 0.0;
  double empirical_loss = 0.0;
  AteResult ate;
  Initial targeted;
};

Eigen::VectorXd clip(Eigen::VectorXd p, double trim) { return p.cwiseMax(trim).cwiseMin(1.0 - trim); }

class CtmleContext {
 public:
  CtmleContext(const Dataset& data, const NuisanceFits& initial, const CtmleConfig& config)
      : data_(data), config_(config) {
    if (!initial.has_outcome() || initial.mu1.size() != data.rows() || initial.mu0.size() != data.rows())
      throw InvalidArgument("selection", "ctmle: initial outcome fits are missing or have the wrong length");
    if (config.folds < 2) throw InvalidArgument("selection", "ctmle: V must be at least 2");
    if (!(config.trim > 0.0 && config.trim < 0.5)) throw InvalidArgument("selection", "trim must lie in (0, 0.5)");
    initial_ = {initial.mu1, initial.mu0};
    folds_ = make_stratified_folds(data.treatment(), config.folds, config.seed);
    all_.resize(static_cast<std::size_t>(data.rows()));
    std::iota(all_.begin(), all_.end(), Index{0});
    for (int f = 0; f < folds_.folds; ++f) {
      train_.push_back(folds_.training_rows(f));
      test_.push_back(folds_.holdout_rows(f));
      train_data_.push_back(data.subset_rows(train_.back()));
    }
  }

  const Dataset& data() const { return data_; }
  const Initial& initial() const { return initial_; }
  const CtmleConfig& config() const { return config_; }

  template <class Fit>
  PsBank bank(const Fit& fit) const {
    PsBank out;
    out.fold.resize(train_.size());
    for (std::size_t f = 0; f < train_.size(); ++f) out.fold[f] = clip(fit(train_[f], nullptr), config_.trim);
    out.full = clip(fit(all_, &out.active), config_.trim);
    return out;
  }

  PsBank logistic_bank(const std::vector<Index>& cols) const {
    const Eigen::MatrixXd xs = take_cols(data_.covariates(), cols);
    const Eigen::VectorXd& a = data_.treatment();
    return bank([&](const std::vector<Index>& rows, std::vector<Index>*) -> Eigen::VectorXd {
      const Eigen::VectorXd at = take(a, rows);
      if (cols.empty()) return Eigen::VectorXd::Constant(a.size(), at.mean());
      return fit_logistic(take_rows(xs, rows), at).predict_proba(xs);
    });
  }

  PsBank lasso_bank(double lambda) const {
    const Eigen::MatrixXd& x = data_.covariates();
    const Eigen::VectorXd& a = data_.treatment();
    return bank([&](const std::vector<Index>& rows, std::vector<Index>* active) -> Eigen::VectorXd {
      const LogisticLassoFit fit = fit_logistic_lasso(take_rows(x, rows), take(a, rows), lambda);
      if (active) *active = fit.active_set;
      return fit.predict_proba(x);
    });
  }

  double cv_loss(const PsBank& bank, const Initial& q) const {
    const double lo = data_.outcome_lo(), hi = data_.outcome_hi();
    const Eigen::VectorXd& y = data_.outcome();
    double total = 0.0;
    for (std::size_t f = 0; f < train_.size(); ++f) {
      const auto& tr = train_[f];
      const auto& te = test_[f];
      const TmleUpdate upd = tmle_fluctuate(train_data_[f], take(bank.fold[f], tr), take(q.mu1, tr), take(q.mu0, tr));
      Eigen::VectorXd m1 = take(q.mu1, te), m0 = take(q.mu0, te);
      tmle_apply(upd.epsilon, lo, hi, take(bank.fold[f], te), m1, m0);
      for (std::size_t r = 0; r < te.size(); ++r) {
        const Index i = te[r];
        const double pred = data_.treated(i) ? m1[static_cast<Index>(r)] : m0[static_cast<Index>(r)];
        total += (y[i] - pred) * (y[i] - pred);
      }
    }
    return total / static_cast<double>(data_.rows());
  }

  Evaluation full(const PsBank& bank, const Initial& q) const {
    NuisanceFits fits;
    fits.ps = bank.full;
    fits.mu1 = q.mu1;
    fits.mu0 = q.mu0;
    Evaluation e;
    e.ate = tmle_ate(data_, fits);
    const TmleUpdate upd = tmle_fluctuate(data_, bank.full, q.mu1, q.mu0);
    e.targeted = {upd.mu1, upd.mu0};
    e.empirical_loss = (data_.outcome() - upd.mu_observed).squaredNorm() / static_cast<double>(data_.rows());
    return e;
  }

  Evaluation evaluate(const PsBank& bank, const Initial& q) const {
    Evaluation e = full(bank, q);
    e.cv_loss = cv_loss(bank, q);
    return e;
  }

 private:
  const Dataset& data_;
  CtmleConfig config_;
  Initial initial_;
  FoldAssignment folds_;
  std::vector<Index> all_;
  std::vector<std::vector<Index>> train_, test_;
  std::vector<Dataset> train_data_;
};

std::size_t argmin_cv(const std::vector<CtmleCandidate>& candidates) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k)
    if (candidates[k].cv_loss < candidates[best].cv_loss) best = k;
  return best;
}

CtmleCandidate record(std::vector<Index> cols, const Evaluation& e) {
  CtmleCandidate c;
  std::sort(cols.begin(), cols.end());
  c.covariates = std::move(cols);
  c.cv_loss = e.cv_loss;
  c.empirical_loss = e.empirical_loss;
  c.estimate = e.ate.estimate;
  return c;
}

CtmleResult finish(CtmleTrace trace, std::vector<AteResult> results) {
  trace.chosen = argmin_cv(trace.candidates);
  CtmleResult out;
  out.ate = std::move(results[trace.chosen]);
  out.ate.method = "ctmle_" + std::string(to_string(trace.variant));
  out.ate.diagnostics.emplace_back("chosen_candidate", static_cast<double>(trace.chosen));
  out.ate.diagnostics.emplace_back("candidates", static_cast<double>(trace.candidates.size()));
  out.ate.diagnostics.emplace_back("chosen_covariates",
                                   static_cast<double>(trace.candidates[trace.chosen].covariates.size()));
  if (trace.variant == CtmleVariant::greedy) {
    out.ate.diagnostics.emplace_back("ps_fits", trace.ps_fits);
    out.ate.diagnostics.emplace_back("restarts", trace.restarts);
  }
  if (trace.variant == CtmleVariant::lasso)
    out.ate.diagnostics.emplace_back("chosen_lambda", trace.candidates[trace.chosen].lambda);
  out.trace = std::move(trace);
  return out;
}

CtmleResult preordered(CtmleVariant variant, const CtmleContext& ctx, std::vector<Index> order,
                       std::vector<double> score) {
  CtmleTrace trace;
  trace.variant = variant;
  trace.order = order;
  trace.order_score = std::move(score);
  std::vector<AteResult> results;
  std::vector<Index> cols;
  int stalls = 0;
  for (std::size_t k = 0; k <= order.size(); ++k) {
    if (k > 0) cols.push_back(order[k - 1]);
    const Evaluation e = ctx.evaluate(ctx.logistic_bank(cols), ctx.initial());
    trace.candidates.push_back(record(cols, e));
    results.push_back(e.ate);
    if (k > 0) {
      const auto& cand = trace.candidates;
      if (cand[k].cv_loss >= cand[k - 1].cv_loss) {
        if (++stalls >= std::max(1, ctx.config().patience)) break;
      } else {
        stalls = 0;
      }
    }
  }
  return finish(std::move(trace), std::move(results));
}

std::vector<Index> stable_order(const std::vector<double>& key, bool ascending) {
  std::vector<Index> order(key.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) {
    return ascending ? key[static_cast<std::size_t>(l)] < key[static_cast<std::size_t>(r)]
                     : key[static_cast<std::size_t>(l)] > key[static_cast<std::size_t>(r)];
  });
  return order;
}

}  // namespace

std::string_view to_string(CtmleVariant variant) noexcept {
  switch (variant) {
    case CtmleVariant::greedy: return "greedy";
    case CtmleVariant::logistic: return "logistic";
    case CtmleVariant::correlation: return "correlation";
    case CtmleVariant::lasso: return "lasso";
  }
  return "greedy";
}

CtmleResult ctmle_greedy(const Dataset& data, const NuisanceFits& initial, const CtmleConfig& config) {
  const CtmleContext ctx(data, initial, config);
  const Index d = data.cols();
  CtmleTrace trace;
  trace.variant = CtmleVariant::greedy;
  std::vector<AteResult> results;

  std::map<std::vector<Index>, PsBank> cache;
  const auto sorted_with = [](std::vector<Index> cols, Index j) {
    cols.push_back(j);
    std::sort(cols.begin(), cols.end());
    return cols;
  };

  Initial q = ctx.initial();
  std::vector<Index> current;
  Evaluation last = ctx.evaluate(ctx.logistic_bank(current), q);
  trace.candidates.push_back(record(current, last));
  results.push_back(last.ate);

  while (static_cast<Index>(current.size()) < d) {
    std::vector<Index> remaining;
    for (Index j = 0; j < d; ++j)
      if (std::find(current.begin(), current.end(), j) == current.end()) remaining.push_back(j);

    std::vector<std::vector<Index>> sets;
    for (Index j : remaining) sets.push_back(sorted_with(current, j));
    std::vector<std::size_t> missing;
    for (std::size_t s = 0; s < sets.size(); ++s)
      if (!cache.count(sets[s])) missing.push_back(s);
    std::vector<PsBank> fresh(missing.size());
    parallel_for(missing.size(), [&](std::size_t m) { fresh[m] = ctx.logistic_bank(sets[missing[m]]); });
    for (std::size_t m = 0; m < missing.size(); ++m) cache.emplace(sets[missing[m]], std::move(fresh[m]));
    trace.ps_fits += static_cast<int>(missing.size());

    bool restarted = false;
    while (true) {
      std::vector<double> losses(sets.size());
      parallel_for(sets.size(), [&](std::size_t s) { losses[s] = ctx.cv_loss(cache.at(sets[s]), q); });
      const std::size_t best = static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) - losses.begin());
      Evaluation e = ctx.full(cache.at(sets[best]), q);
      e.cv_loss = losses[best];
      if (e.empirical_loss < last.empirical_loss || restarted) {
        current = sets[best];
        CtmleCandidate c = record(current, e);
        c.restarted = restarted;
        trace.candidates.push_back(std::move(c));
        results.push_back(e.ate);
        last = std::move(e);
        break;
      }
      q = last.targeted;
      restarted = true;
      ++trace.restarts;
    }
  }
  return finish(std::move(trace), std::move(results));
}

CtmleResult ctmle_preorder_logistic(const Dataset& data, const NuisanceFits& initial, const CtmleConfig& config) {
  const CtmleContext ctx(data, initial, config);
  const Index d = data.cols();
  std::vector<double> loss(static_cast<std::size_t>(d));
  parallel_for(loss.size(), [&](std::size_t k) {
    const PsBank bank = ctx.logistic_bank({static_cast<Index>(k)});
    loss[k] = ctx.full(bank, ctx.initial()).empirical_loss;
  });
  return preordered(CtmleVariant::logistic, ctx, stable_order(loss, true), loss);
}

CtmleResult ctmle_preorder_correlation(const Dataset& data, const NuisanceFits& initial,
                                       const CtmleConfig& config) {
  const CtmleContext ctx(data, initial, config);
  const Index d = data.cols();
  Eigen::VectorXd resid(data.rows());
  for (Index i = 0; i < data.rows(); ++i)
    resid[i] = data.outcome()[i] - (data.treated(i) ? initial.mu1[i] : initial.mu0[i]);
  std::vector<double> score(static_cast<std::size_t>(d));
  for (Index k = 0; k < d; ++k) {
    const Eigen::VectorXd col = data.covariates().col(k);
    score[static_cast<std::size_t>(k)] = std::abs(correlation(col, resid));
  }
  return preordered(CtmleVariant::correlation, ctx, stable_order(score, false), score);
}

CtmleResult ctmle_lasso(const Dataset& data, const NuisanceFits& initial, const CtmleConfig& config) {
  const CtmleContext ctx(data, initial, config);
  std::vector<double> path = config.lambda_path;
  if (path.empty()) {
    if (config.path_length < 1 || !(config.path_ratio > 0.0 && config.path_ratio < 1.0))
      throw InvalidArgument("selection", "ctmle_lasso: invalid default path settings");
    const FoldAssignment folds = make_stratified_folds(data.treatment(), config.folds, config.seed);
    const double first = logistic_lasso_cv(data.covariates(), data.treatment(), {}, folds).lambda;
    for (int k = 0; k < config.path_length; ++k) path.push_back(first * std::pow(config.path_ratio, k));
  }
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (!(path[k] >= 0.0) || !std::isfinite(path[k])) throw InvalidArgument("selection", "ctmle_lasso: invalid lambda");
    if (k > 0 && !(path[k] < path[k - 1]))
      throw InvalidArgument("selection", "ctmle_lasso: lambda path must be strictly decreasing");
  }

  CtmleTrace trace;
  trace.variant = CtmleVariant::lasso;
  trace.candidates.resize(path.size());
  std::vector<AteResult> results(path.size());
  parallel_for(path.size(), [&](std::size_t k) {
    const PsBank bank = ctx.lasso_bank(path[k]);
    const Evaluation e = ctx.evaluate(bank, ctx.initial());
    trace.candidates[k] = record(bank.active, e);
    trace.candidates[k].lambda = path[k];
    results[k] = e.ate;
  });
  return finish(std::move(trace), std::move(results));
}

CtmleResult run_ctmle(CtmleVariant variant, const Dataset& data, const NuisanceFits& initial,
                      const CtmleConfig& config) {
  switch (variant) {
    case CtmleVariant::greedy: return ctmle_greedy(data, initial, config);
    case CtmleVariant::logistic: return ctmle_preorder_logistic(data, initial, config);
    case CtmleVariant::correlation: return ctmle_preorder_correlation(data, initial, config);
    case CtmleVariant::lasso: return ctmle_lasso(data, initial, config);
  }
  throw InvalidArgument("selection", "unknown ctmle variant");
}

std::string CtmleTrace::to_csv(const std::vector<std::string>& names) const {
  std::ostringstream os;
  os.precision(17);
  os << "candidate,covariates_or_lambda,cv_loss,chosen\n";
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& c = candidates[k];
    os << k << ',';
    if (variant == CtmleVariant::lasso) {
      os << c.lambda;
    } else if (c.covariates.empty()) {
      os << "intercept";
    } else {
      for (std::size_t j = 0; j < c.covariates.size(); ++j) {
        const auto idx = static_cast<std::size_t>(c.covariates[j]);
        os << (j ? "+" : "") << (idx < names.size() ? names[idx] : "x" + std::to_string(idx + 1));
      }
    }
    os << ',' << c.cv_loss << ',' << (k == chosen ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace ateml
