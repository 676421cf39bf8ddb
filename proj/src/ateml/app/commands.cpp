#include "ateml/app/commands.hpp"

#include "ateml/balance/matching.hpp"
#include "ateml/balance/ps.hpp"
#include "ateml/core/error.hpp"
#include "ateml/core/parallel.hpp"
#include "ateml/selection/selection.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>

namespace ateml {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

CtmleVariant ctmle_variant(const std::string& id) {
  if (id == "ctmle_greedy") return CtmleVariant::greedy;
  if (id == "ctmle_logistic") return CtmleVariant::logistic;
  if (id == "ctmle_correlation") return CtmleVariant::correlation;
  return CtmleVariant::lasso;
}

bool needs_bootstrap(const std::string& id) { return id == "reg" || id == "match"; }

PsConfig ps_config(const RunConfig& c, Index d) {
  PsConfig ps;
  ps.trim = c.trim;
  ps.seed = c.seed;
  ps.sl_folds = c.v_folds;
  if (c.ps_learner == "sl") {
    ps.method = PsMethod::super_learner;
    ps.library = fast_library(TargetKind::probability);
  } else if (c.ps_learner == "sl_default") {
    ps.method = PsMethod::super_learner;
    ps.library = default_library(d, TargetKind::probability);
  } else if (c.ps_learner == "balance_boost") {
    ps.method = PsMethod::balance_boost;
  } else {
    ps.method = PsMethod::learner;
    ps.spec = parse_learner_spec(c.ps_learner);
  }
  return ps;
}

}  // namespace

NuisanceConfig nuisance_config(const RunConfig& c, const Dataset& data) {
  NuisanceConfig nc;
  nc.ps = ps_config(c, data.cols());
  nc.seed = c.seed;
  nc.outcome.separate_arms = !c.joint_outcome;
  nc.outcome.sl_folds = c.v_folds;
  const TargetKind kind =
      data.outcome_kind() == OutcomeKind::binary ? TargetKind::probability : TargetKind::regression;
  if (c.outcome_learner == "sl") {
    nc.outcome.super_learner = true;
    nc.outcome.library = fast_library(kind);
  } else if (c.outcome_learner == "sl_default") {
    nc.outcome.super_learner = true;
    nc.outcome.library = default_library(data.cols() + (c.joint_outcome ? 1 : 0), kind);
  } else {
    nc.outcome.spec = parse_learner_spec(c.outcome_learner);
  }
  return nc;
}

Estimation estimate_once(const RunConfig& c, const Dataset& data) {
  Estimation out;
  const std::string& id = c.estimator;
  if (id == "naive") {
    out.ate = naive_ate(data);
    return out;
  }
  if (id == "double_lasso") {
    DoubleLassoConfig dl;
    dl.folds = c.v_folds;
    dl.seed = c.seed;
    out.ate = double_lasso_ate(data, parse_post_method(c.post_method), dl, c.trim);
    out.ate.method = "double_lasso";
    return out;
  }
  const NuisanceConfig nc = nuisance_config(c, data);
  if (id == "iptw" || id == "match") {
    const PsFit ps = estimate_ps(nc.ps, data);
    if (id == "iptw") {
      out.ate = iptw_ate(data, ps.ps);
      out.balance_weights = adjustment("iptw", iptw_weights(ps, data.treatment()));
    } else {
      const MatchResult m = ps_match(ps.ps, data.treatment());
      out.ate = match_ate(data, m);
      out.balance_weights = adjustment("match", m);
    }
    out.ate.diagnostics.emplace_back("clipped_fraction", ps.clipped_fraction);
    out.ate.warnings.insert(out.ate.warnings.end(), ps.warnings.begin(), ps.warnings.end());
    return out;
  }
  if (id == "dml") {
    DmlConfig dml;
    dml.folds = c.dml_k;
    dml.repetitions = c.dml_s;
    dml.aggregate = c.dml_aggregate == "mean" ? Aggregate::mean : Aggregate::median;
    dml.nuisance = nc;
    dml.seed = c.seed;
    out.ate = dml_ate(data, dml);
    return out;
  }
  if (id.rfind("ctmle_", 0) == 0) {
    NuisanceConfig outcome_only = nc;
    outcome_only.ps.method = PsMethod::learner;
    outcome_only.ps.spec = LearnerSpec::defaults(LearnerFamily::mean);
    const NuisanceFits initial = fit_nuisances(outcome_only, data);
    CtmleConfig cc;
    cc.folds = c.v_folds;
    cc.seed = c.seed;
    cc.trim = c.trim;
    CtmleResult res = run_ctmle(ctmle_variant(id), data, initial, cc);
    out.ate = std::move(res.ate);
    out.trace = std::move(res.trace);
    out.tables = initial.sl_tables;
    return out;
  }
  const NuisanceFits fits = fit_nuisances(nc, data);
  out.tables = fits.sl_tables;
  if (id == "reg") {
    out.ate = reg_ate(data, fits);
  } else if (id == "aiptw") {
    out.ate = aiptw_ate(data, fits);
    out.balance_weights = adjustment("iptw", iptw_weights(fits.ps, data.treatment()));
  } else if (id == "tmle") {
    out.ate = tmle_ate(data, fits);
    out.balance_weights = adjustment("iptw", iptw_weights(fits.ps, data.treatment()));
  } else {
    throw InvalidArgument("cli", "unknown estimator '" + id + "'");
  }
  return out;
}

RunReport run_on_dataset(const RunConfig& config, const Dataset& data, Index total_rows, Index dropped_rows) {
  config.validate();
  const auto start = Clock::now();
  Estimation est = estimate_once(config, data);
  const double estimate_time = seconds_since(start);

  double boot_time = 0.0;
  const int replicates =
      config.bootstrap > 0 ? config.bootstrap : (needs_bootstrap(config.estimator) ? kDefaultBootstrap : 0);
  if (replicates > 0) {
    const auto boot_start = Clock::now();
    const BootstrapResult boot = bootstrap_ci(
        [&](const Dataset& resample) { return estimate_once(config, resample).ate.estimate; }, data, replicates,
        config.seed);
    attach_bootstrap(est.ate, boot);
    if (boot.failures > 0)
      est.ate.warnings.push_back("bootstrap: " + std::to_string(boot.failures) + " resamples failed");
    boot_time = seconds_since(boot_start);
  }

  RunReport r;
  r.config = config;
  r.n = data.rows();
  r.d = data.cols();
  r.total_rows = total_rows < 0 ? data.rows() : total_rows;
  r.dropped_rows = dropped_rows;
  r.treated = data.treated_count();
  r.outcome_kind = data.outcome_kind() == OutcomeKind::binary ? "binary" : "bounded_continuous";
  r.covariates = data.names();
  r.method = est.ate.method;
  r.estimate = est.ate.estimate;
  r.se = est.ate.se;
  r.ci_lo = est.ate.ci_lo;
  r.ci_hi = est.ate.ci_hi;
  r.se_kind = std::string(to_string(est.ate.se_kind));
  r.diagnostics = est.ate.diagnostics;
  if (est.balance_weights) {
    const BalanceReport table = balance_table(data, {*est.balance_weights});
    r.balance = BalanceSummary{est.balance_weights->label, table.asam[0], table.asam[1],
                               static_cast<int>(table.flagged(0)), static_cast<int>(table.flagged(1))};
  }
  r.sl_tables = std::move(est.tables);
  r.ctmle = std::move(est.trace);
  if (dropped_rows > 0) r.warnings.push_back("ingest: dropped " + std::to_string(dropped_rows) + " incomplete rows");
  r.warnings.insert(r.warnings.end(), est.ate.warnings.begin(), est.ate.warnings.end());
  r.timings = {{"estimate_s", estimate_time}, {"bootstrap_s", boot_time}};
  return r;
}

RunReport run(const RunConfig& config) {
  config.validate();
  if (config.data.empty()) throw InvalidArgument("cli", "no data file given");
  set_thread_count(config.threads);
  const auto start = Clock::now();
  const IngestResult in = ingest_csv(config.data, {config.treatment, config.outcome, config.covariates});
  const double ingest_time = seconds_since(start);
  RunReport r = run_on_dataset(config, in.data, in.total_rows, in.dropped_rows);
  r.timings.insert(r.timings.begin(), {"ingest_s", ingest_time});
  r.timings.emplace_back("total_s", seconds_since(start));
  if (!config.out.empty()) write_text_file(config.out, r.to_json());
  return r;
}

const std::vector<std::string> kAdjustmentIds = {"iptw_ps",    "iptw_logistic", "iptw_boosted", "iptw_sl",
                                                 "match_ps",   "match_logistic", "match_boosted"};

std::string balance_cmd(const RunConfig& config, const std::vector<std::string>& adjustments) {
  if (config.data.empty()) throw InvalidArgument("cli", "no data file given");
  set_thread_count(config.threads);
  const IngestResult in = ingest_csv(config.data, {config.treatment, config.outcome, config.covariates});
  const Dataset& data = in.data;
  std::vector<BalanceAdjustment> adj;
  for (const auto& id : adjustments) {
    if (std::find(kAdjustmentIds.begin(), kAdjustmentIds.end(), id) == kAdjustmentIds.end())
      throw InvalidArgument("cli", "unknown balance adjustment '" + id + "'");
    RunConfig c = config;
    const std::string source = id.substr(id.find('_') + 1);
    if (source == "logistic") c.ps_learner = "logistic";
    else if (source == "boosted") c.ps_learner = "balance_boost";
    else if (source == "sl") c.ps_learner = "sl";
    const PsFit ps = estimate_ps(ps_config(c, data.cols()), data);
    if (id.rfind("iptw", 0) == 0) adj.push_back(adjustment(id, iptw_weights(ps, data.treatment())));
    else adj.push_back(adjustment(id, ps_match(ps.ps, data.treatment())));
  }
  return balance_table(data, adj).to_csv();
}

DgpSpec load_dgp_spec(const std::string& name_or_path) {
  for (const auto& s : builtin_specs())
    if (s.name == name_or_path) return s;
  if (!std::filesystem::exists(name_or_path)) return builtin_spec(name_or_path);
  using json = nlohmann::json;
  json j;
  try {
    j = json::parse(read_text_file(name_or_path));
    DgpSpec s;
    s.name = j.value("name", std::filesystem::path(name_or_path).stem().string());
    s.n = j.value("n", Index{2000});
    for (const auto& c : j.at("covariates")) {
      CovariateSpec cov;
      const std::string law = c.value("law", "normal");
      if (law == "bernoulli") {
        cov.law = CovariateLaw::bernoulli;
        cov.q = c.value("q", 0.5);
      } else if (law != "normal") {
        throw InvalidArgument("dgp", "unknown covariate law '" + law + "'");
      }
      s.covariates.push_back(cov);
    }
    s.ps_intercept = j.value("ps_intercept", 0.0);
    s.ps_coefficients = j.value("ps_coefficients", std::vector<double>{});
    s.ps_squares = j.value("ps_squares", std::vector<double>{});
    s.outcome_intercept = j.value("outcome_intercept", 0.0);
    s.outcome_coefficients = j.value("outcome_coefficients", std::vector<double>{});
    s.outcome_squares = j.value("outcome_squares", std::vector<double>{});
    s.tau = j.value("tau", 1.0);
    s.noise = j.value("noise", 1.0);
    const std::string kind = j.value("outcome_kind", "continuous");
    s.outcome_kind = kind == "binary" ? OutcomeKind::binary : OutcomeKind::bounded_continuous;
    s.validate();
    return s;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw InvalidArgument("dgp", "spec file '" + name_or_path + "': " + e.what());
  }
}

std::string dgp_spec_to_json(const DgpSpec& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["n"] = s.n;
  nlohmann::ordered_json covs = nlohmann::ordered_json::array();
  for (const auto& c : s.covariates) {
    if (c.law == CovariateLaw::bernoulli) covs.push_back({{"law", "bernoulli"}, {"q", c.q}});
    else covs.push_back({{"law", "normal"}});
  }
  j["covariates"] = covs;
  j["ps_intercept"] = s.ps_intercept;
  j["ps_coefficients"] = s.ps_coefficients;
  j["ps_squares"] = s.ps_squares;
  j["outcome_intercept"] = s.outcome_intercept;
  j["outcome_coefficients"] = s.outcome_coefficients;
  j["outcome_squares"] = s.outcome_squares;
  j["tau"] = s.tau;
  j["noise"] = s.noise;
  j["outcome_kind"] = s.outcome_kind == OutcomeKind::binary ? "binary" : "continuous";
  return j.dump(2) + "\n";
}

std::string simulate_cmd(const std::string& spec_name, const std::vector<std::string>& estimators, int replications,
                         std::uint64_t seed, const RunConfig& base) {
  const DgpSpec spec = load_dgp_spec(spec_name);
  if (estimators.empty()) throw InvalidArgument("cli", "simulate: no estimators given");
  set_thread_count(base.threads);
  std::vector<std::pair<std::string, McEstimator>> list;
  for (const auto& id : estimators) {
    if (id == "iptw_true") {
      list.emplace_back(id, [](const GeneratedData& g) {
        AteResult r = iptw_ate(g.data, g.true_ps);
        r.method = "iptw_true";
        return r;
      });
      continue;
    }
    RunConfig c = base;
    c.estimator = id;
    c.validate();
    list.emplace_back(id, [c](const GeneratedData& g) {
      AteResult r = estimate_once(c, g.data).ate;
      if (c.bootstrap > 0)
        attach_bootstrap(r, bootstrap_ci([&](const Dataset& d) { return estimate_once(c, d).ate.estimate; }, g.data,
                                         c.bootstrap, c.seed));
      return r;
    });
  }
  return mc_eval_many(list, spec, replications, seed).to_csv();
}

std::string export_dgp(const std::string& spec_name, std::uint64_t seed, Index n) {
  DgpSpec spec = load_dgp_spec(spec_name);
  if (n > 0) spec.n = n;
  return dataset_to_csv(gen_dataset(spec, seed).data);
}

}  // namespace ateml
