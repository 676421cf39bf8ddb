// Acceptance run: one PASS/FAIL line per criterion, fixed seeds throughout.
#include "ateml/app/commands.hpp"
#include "ateml/app/config.hpp"
#include "ateml/app/report.hpp"
#include "ateml/balance/balance.hpp"
#include "ateml/balance/boosted_ps.hpp"
#include "ateml/core/folds.hpp"
#include "ateml/core/rng.hpp"
#include "ateml/core/stats.hpp"
#include "ateml/dgp/dgp.hpp"
#include "ateml/estimators/estimators.hpp"
#include "ateml/estimators/nuisance.hpp"
#include "ateml/learners/lasso.hpp"
#include "ateml/selection/selection.hpp"
#include "ateml/superlearner/superlearner.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace ateml;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %d %s: %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Dataset random_dataset(Rng& gen, Index n, Index d, bool binary) {
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd a(n), y(n);
  for (Index i = 0; i < n; ++i) {
    double lp = 0.0, g = 0.0;
    for (Index j = 0; j < d; ++j) {
      x(i, j) = gen.normal();
      lp += (j % 2 ? -0.4 : 0.5) * x(i, j);
      g += 0.7 * x(i, j);
    }
    a[i] = gen.bernoulli(expit(lp)) ? 1.0 : 0.0;
    if (i < 2) a[i] = 1.0;
    if (i >= 2 && i < 4) a[i] = 0.0;
    y[i] = binary ? (gen.bernoulli(expit(g + a[i])) ? 1.0 : 0.0) : g + a[i] + gen.normal();
  }
  if (binary) {
    y[0] = 0.0;
    y[2] = 1.0;
    return Dataset(std::move(x), default_names(d), std::move(a), std::move(y));
  }
  return Dataset::with_observed_bounds(std::move(x), default_names(d), std::move(a), std::move(y));
}

std::vector<Index> all_but_first(Index d) {
  std::vector<Index> cols;
  for (Index j = 1; j < d; ++j) cols.push_back(j);
  return cols;
}

std::string mc_line(const McRow& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s bias=%.4f mc_se=%.4f", r.estimator.c_str(), r.bias, r.mc_se);
  return buf;
}

bool unbiased(const McRow& r) { return r.failures == 0 && std::abs(r.bias) < 2.0 * r.mc_se; }

// 1. exact identities
void criterion1() {
  Rng gen(101);
  bool ok = true;
  std::string detail;
  double slowest = 0.0;

  auto t0 = Clock::now();
  for (int t = 0; t < 50; ++t) {
    const Dataset d = random_dataset(gen, 50 + static_cast<Index>(gen.below(200)), 3, false);
    NuisanceFits f = fit_nuisances(NuisanceConfig{}, d);
    f.mu1.setZero();
    f.mu0.setZero();
    if (aiptw_ate(d, f).estimate != iptw_ate(d, f.ps).estimate) ok = false;
  }
  slowest = std::max(slowest, seconds_since(t0));

  t0 = Clock::now();
  for (int t = 0; t < 10; ++t) {
    const Dataset d = random_dataset(gen, 300, 3, false);
    DmlConfig cfg;
    cfg.repetitions = 1;
    cfg.disable_splitting = true;
    cfg.seed = static_cast<std::uint64_t>(t);
    const AteResult dml = dml_ate(d, cfg);
    const AteResult ai = aiptw_ate(d, fit_nuisances(NuisanceConfig{}, d));
    if (dml.estimate != ai.estimate || dml.se != ai.se) ok = false;
  }
  slowest = std::max(slowest, seconds_since(t0));

  t0 = Clock::now();
  for (int t = 0; t < 50; ++t) {
    const Index n = 20 + static_cast<Index>(gen.below(100)), p = 1 + static_cast<Index>(gen.below(10));
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < p; ++j) x(i, j) = gen.normal();
      y[i] = x(i, 0) + gen.normal();
    }
    const double lmax = lasso_lambda_max(x, y);
    for (double scale : {1.0, 1.5, 10.0})
      if ((fit_lasso(x, y, lmax * scale).coefficients.array() != 0.0).any()) ok = false;
  }
  slowest = std::max(slowest, seconds_since(t0));

  t0 = Clock::now();
  for (int t = 0; t < 3; ++t) {
    const Index n = 200;
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < 3; ++j) x(i, j) = gen.normal();
      y[i] = std::sin(x(i, 0)) + x(i, 1) * x(i, 2) + 0.5 * gen.normal();
    }
    const SLLibrary lib = fast_library(TargetKind::regression);
    const FoldAssignment folds = make_folds(n, 5, 7 + static_cast<std::uint64_t>(t));
    const Eigen::MatrixXd z = level_one(lib, x, y, folds);
    const Eigen::VectorXd w = meta_weights(z, y, Loss::mse).weights;
    if ((w.array() < 0.0).any() || std::abs(w.sum() - 1.0) > 1e-12) ok = false;
    const double sl_risk = (z * w - y).squaredNorm() / static_cast<double>(n);
    for (Index k = 0; k < z.cols(); ++k)
      if (sl_risk > (z.col(k) - y).squaredNorm() / static_cast<double>(n) + 1e-12) ok = false;
  }
  slowest = std::max(slowest, seconds_since(t0));

  report(1, ok && slowest < 1.0, "identities hold=" + std::string(ok ? "yes" : "no") + fmt(", slowest group %.3fs", slowest));
}

// 2. TMLE score equation
void criterion2() {
  Rng gen(202);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index n = 50 + static_cast<Index>(gen.below(451));
    const Dataset d = random_dataset(gen, n, 3, t % 2 == 1);
    const NuisanceFits f = fit_nuisances(NuisanceConfig{}, d);
    const TmleUpdate u = tmle_fluctuate(d, f.ps, f.mu1, f.mu0);
    double s = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double ai = d.treatment()[i];
      const double h = ai / f.ps[i] - (1.0 - ai) / (1.0 - f.ps[i]);
      s += h * (d.outcome()[i] - u.mu_observed[i]);
    }
    worst = std::max(worst, std::abs(s / static_cast<double>(n)));
  }
  const double elapsed = seconds_since(t0);
  report(2, worst < 1e-6 && elapsed < 30.0, fmt("max |score|=%.3g", worst) + fmt(", %.2fs", elapsed));
}

McEstimator parametric(const std::function<AteResult(const Dataset&, const NuisanceFits&)>& est,
                       NuisanceConfig cfg = {}) {
  return [est, cfg](const GeneratedData& g) { return est(g.data, fit_nuisances(cfg, g.data)); };
}

McEstimator dml_estimator() {
  return [](const GeneratedData& g) {
    DmlConfig cfg;
    cfg.seed = 11;
    return dml_ate(g.data, cfg);
  };
}

// 3. unbiasedness under randomization
void criterion3() {
  DgpSpec spec = builtin_spec("randomized_linear");
  spec.n = 2000;
  const auto t0 = Clock::now();
  const McReport r = mc_eval_many(
      {{"naive", [](const GeneratedData& g) { return naive_ate(g.data); }},
       {"iptw_true", [](const GeneratedData& g) { return iptw_ate(g.data, g.true_ps); }},
       {"aiptw", parametric(aiptw_ate)},
       {"tmle", parametric([](const Dataset& d, const NuisanceFits& f) { return tmle_ate(d, f); })},
       {"dml", dml_estimator()}},
      spec, 200, 303);
  const double elapsed = seconds_since(t0);
  bool ok = elapsed < 600.0;
  std::string detail;
  for (const auto& row : r.rows) {
    ok = ok && unbiased(row);
    detail += mc_line(row) + "; ";
  }
  report(3, ok, detail + fmt("%.1fs", elapsed));
}

// 4. double robustness with one nuisance misspecified
void criterion4() {
  DgpSpec spec = builtin_spec("confounded_linear");
  spec.n = 2000;
  NuisanceConfig bad_ps, bad_mu;
  bad_ps.ps_columns = all_but_first(spec.d());
  bad_mu.outcome_columns = all_but_first(spec.d());
  const auto tmle = [](const Dataset& d, const NuisanceFits& f) { return tmle_ate(d, f); };
  const McReport r = mc_eval_many(
      {{"aiptw_bad_ps", parametric(aiptw_ate, bad_ps)},
       {"tmle_bad_ps", parametric(tmle, bad_ps)},
       {"iptw_bad_ps", parametric([](const Dataset& d, const NuisanceFits& f) { return iptw_ate(d, f.ps); }, bad_ps)},
       {"aiptw_bad_mu", parametric(aiptw_ate, bad_mu)},
       {"tmle_bad_mu", parametric(tmle, bad_mu)},
       {"reg_bad_mu", parametric(reg_ate, bad_mu)}},
      spec, 200, 404);
  bool ok = true;
  std::string detail;
  for (const auto& row : r.rows) {
    const bool singly = row.estimator.rfind("iptw", 0) == 0 || row.estimator.rfind("reg", 0) == 0;
    if (singly)
      ok = ok && row.failures == 0 && std::abs(row.bias) > 4.0 * row.mc_se;
    else
      ok = ok && unbiased(row);
    detail += mc_line(row) + "; ";
  }
  report(4, ok, detail);
}

// 5. coverage of influence-function intervals
void criterion5() {
  DgpSpec spec = builtin_spec("confounded_linear");
  spec.n = 1000;
  const auto t0 = Clock::now();
  const McReport r = mc_eval_many(
      {{"aiptw", parametric(aiptw_ate)},
       {"tmle", parametric([](const Dataset& d, const NuisanceFits& f) { return tmle_ate(d, f); })},
       {"dml", dml_estimator()}},
      spec, 500, 505);
  const double elapsed = seconds_since(t0);
  bool ok = elapsed < 1800.0;
  std::string detail;
  for (const auto& row : r.rows) {
    ok = ok && row.failures == 0 && row.coverage >= 0.91 && row.coverage <= 0.98;
    detail += row.estimator + fmt(" coverage=%.3f; ", row.coverage);
  }
  report(5, ok, detail + fmt("%.1fs", elapsed));
}

// 6. balance
void criterion6() {
  DgpSpec spec = builtin_spec("confounded_linear");
  spec.n = 2000;
  int reduced = 0, balanced = 0;
  const int seeds = 50;
  for (int s = 1; s <= seeds; ++s) {
    const GeneratedData g = gen_dataset(spec, static_cast<std::uint64_t>(600 + s));
    const auto& x = g.data.covariates();
    const auto& a = g.data.treatment();
    const BoostedBalanceFit fit = boosted_balance_ps(g.data);
    const Eigen::VectorXd wb = iptw_weights(fit.ps, a).w;
    if (asam(x, a, &wb) < asam(x, a)) ++reduced;
    const Eigen::VectorXd wt = iptw_weights(g.true_ps, a).w;
    bool all_small = true;
    for (Index j = 0; j < x.cols(); ++j) {
      const auto v = smd(x.col(j), a, &wt);
      if (!v || std::abs(*v) >= kImbalanceFlag) all_small = false;
    }
    if (all_small) ++balanced;
  }
  const bool ok = reduced >= 48 && balanced >= 45;
  report(6, ok,
         "boosted ASAM reduced in " + std::to_string(reduced) + "/50 (need 48); true-PS all |SMD|<0.1 in " +
             std::to_string(balanced) + "/50 (need 45)");
}

// 7. lasso correctness against an independent KKT check
double kkt_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LassoFit& fit) {
  const double n = static_cast<double>(x.rows());
  const Eigen::VectorXd r = y - x * fit.coefficients - Eigen::VectorXd::Constant(x.rows(), fit.intercept);
  double worst = std::abs(r.mean());
  for (Index j = 0; j < x.cols(); ++j) {
    const double mu = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - mu).square().sum() / n);
    const double g = ((x.col(j).array() - mu) / sd * r.array()).sum() / n;
    const double b = fit.coefficients[j] * sd;
    const double v = b == 0.0 ? std::max(0.0, std::abs(g) - fit.lambda) : std::abs(g - fit.lambda * (b > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

void criterion7() {
  Rng gen(707);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Index n = 30 + static_cast<Index>(gen.below(200)), p = 1 + static_cast<Index>(gen.below(30));
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < p; ++j) x(i, j) = (1.0 + j % 3) * gen.normal() + (j % 4) * 0.5;
      y[i] = 2.0 * x(i, 0) - (p > 1 ? x(i, 1) : 0.0) + gen.normal();
    }
    const double lambda = lasso_lambda_max(x, y) * (0.01 + 0.9 * gen.uniform());
    worst = std::max(worst, kkt_residual(x, y, fit_lasso(x, y, lambda)));
  }

  double closed = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Index n = 2 * (10 + static_cast<Index>(gen.below(100)));
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
      x(i, 0) = i % 2 ? 1.0 : -1.0;
      y[i] = 0.8 * x(i, 0) + gen.normal();
    }
    const double c = (x.col(0).array() * y.array()).sum() / static_cast<double>(n);
    const double lambda = std::abs(c) * 1.5 * gen.uniform();
    const double expected = (c > 0 ? 1.0 : -1.0) * std::max(std::abs(c) - lambda, 0.0);
    const LassoFit fit = fit_lasso(x, y, lambda);
    closed = std::max(closed, std::abs(fit.coefficients[0] - expected));
    closed = std::max(closed, std::abs(fit.intercept - y.mean()));
  }
  report(7, worst < 1e-6 && closed < 1e-10, fmt("max KKT residual=%.3g", worst) + fmt(", soft-threshold error=%.3g", closed));
}

// 8. double lasso selection and post-selection bias
void criterion8() {
  DgpSpec spec = builtin_spec("sparse_highdim");
  spec.n = 2000;
  std::atomic<int> covered{0};
  const McRow row = mc_eval(
      [&covered](const GeneratedData& g) {
        DoubleLassoConfig cfg;
        cfg.seed = 17;
        const auto& d = g.data;
        const SelectionResult sel = double_lasso_select(d.covariates(), d.treatment(), d.outcome(), cfg);
        const auto& u = sel.union_set;
        if (std::binary_search(u.begin(), u.end(), Index{0}) && std::binary_search(u.begin(), u.end(), Index{1}) &&
            std::binary_search(u.begin(), u.end(), Index{2}))
          ++covered;
        return post_double_ate(d, sel, PostMethod::aiptw);
      },
      spec, 50, 808, "double_lasso_aiptw");
  const bool ok = covered.load() >= 48 && unbiased(row);
  report(8, ok, "union covers x1-x3 in " + std::to_string(covered.load()) + "/50 (need 48); " + mc_line(row));
}

// 9. CTMLE trace invariants
std::string trace_problem(const CtmleTrace& t, double estimate, Index d) {
  if (t.candidates.empty()) return "empty trace";
  const auto& best = t.candidates[t.chosen];
  for (std::size_t k = 0; k < t.candidates.size(); ++k) {
    if (best.cv_loss > t.candidates[k].cv_loss) return "chosen candidate is not the argmin";
    if (k < t.chosen && !(t.candidates[k].cv_loss > best.cv_loss)) return "argmin tie not resolved to the first";
  }
  if (estimate != best.estimate) return "estimate differs from the chosen candidate";
  for (std::size_t k = 1; k < t.candidates.size(); ++k) {
    const auto& prev = t.candidates[k - 1];
    const auto& cur = t.candidates[k];
    if (t.variant == CtmleVariant::lasso) {
      if (!(cur.lambda < prev.lambda)) return "lambda path not decreasing";
    } else if (cur.covariates.size() != prev.covariates.size() + 1 ||
               !std::includes(cur.covariates.begin(), cur.covariates.end(), prev.covariates.begin(),
                              prev.covariates.end())) {
      return "covariate sets not nested";
    }
  }
  if (t.variant == CtmleVariant::greedy && t.ps_fits > d * (d + 1) / 2) return "greedy fit count over bound";
  return "";
}

void criterion9() {
  DgpSpec spec = builtin_spec("confounded_linear");
  spec.n = 1000;
  const Index d = spec.d();
  int runs = 0, violations = 0, max_fits = 0;
  std::string first;
  for (int s = 1; s <= 50; ++s) {
    const GeneratedData g = gen_dataset(spec, static_cast<std::uint64_t>(900 + s));
    NuisanceConfig nc;
    nc.ps.spec = LearnerSpec::defaults(LearnerFamily::mean);
    const NuisanceFits init = fit_nuisances(nc, g.data);
    CtmleConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    for (auto v : {CtmleVariant::greedy, CtmleVariant::logistic, CtmleVariant::correlation, CtmleVariant::lasso}) {
      const CtmleResult r = run_ctmle(v, g.data, init, cfg);
      ++runs;
      if (v == CtmleVariant::greedy) max_fits = std::max(max_fits, r.trace.ps_fits);
      const std::string problem = trace_problem(r.trace, r.ate.estimate, d);
      if (!problem.empty()) {
        ++violations;
        if (first.empty()) first = std::string(to_string(v)) + " seed " + std::to_string(s) + ": " + problem;
      }
    }
  }
  report(9, violations == 0,
         std::to_string(runs) + " runs, " + std::to_string(violations) + " violations, greedy max fits " +
             std::to_string(max_fits) + " (bound " + std::to_string(d * (d + 1) / 2) + ")" +
             (first.empty() ? "" : "; first: " + first));
}

// 10. CLI determinism and serialization round-trips
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  return std::system((std::string(ATEML_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
}

std::string stripped(const std::string& report_text, const fs::path& out) {
  auto j = nlohmann::json::parse(report_text);
  j.erase("timings");
  if (j["config"]["out"] != out.string()) return "unexpected out path";
  j["config"].erase("out");
  return j.dump();
}

RunConfig random_config(Rng& gen) {
  RunConfig c;
  c.data = "data_" + std::to_string(gen.below(1000)) + ".csv";
  c.treatment = gen.bernoulli(0.5) ? "A" : "treat";
  c.outcome = gen.bernoulli(0.5) ? "Y" : "resp";
  for (std::uint64_t k = gen.below(4); k > 0; --k) c.covariates.push_back("c" + std::to_string(gen.below(50)));
  c.estimator = kEstimatorIds[gen.below(kEstimatorIds.size())];
  const char* ps[] = {"logistic", "sl", "sl_default", "balance_boost", "lasso", "forest"};
  c.ps_learner = ps[gen.below(6)];
  const char* mu[] = {"ols", "sl", "sl_default", "boost", "tree"};
  c.outcome_learner = mu[gen.below(5)];
  c.joint_outcome = gen.bernoulli(0.5);
  c.v_folds = 2 + static_cast<int>(gen.below(19));
  c.seed = gen.next_u64();
  c.bootstrap = gen.bernoulli(0.5) ? 0 : 100 + static_cast<int>(gen.below(900));
  c.trim = 0.001 + 0.2 * gen.uniform();
  c.dml_k = 2 + static_cast<int>(gen.below(9));
  c.dml_s = 1 + static_cast<int>(gen.below(21));
  c.dml_aggregate = gen.bernoulli(0.5) ? "median" : "mean";
  const char* post[] = {"reg", "iptw", "aiptw"};
  c.post_method = post[gen.below(3)];
  c.out = "r" + std::to_string(gen.below(100)) + ".json";
  c.threads = static_cast<int>(gen.below(9));
  return c;
}

void criterion10() {
  const fs::path dir = fs::temp_directory_path() / "ateml_acceptance";
  fs::create_directories(dir);
  const fs::path data = dir / "data.csv";
  bool deterministic = cli("export-dgp --spec confounded_linear --seed 10 --n 500 --out " + data.string()) == 0;
  int compared = 0;
  std::vector<std::string> reports;
  for (const std::string est : {"naive", "reg", "iptw", "match", "aiptw", "tmle", "dml", "double_lasso", "ctmle_greedy"}) {
    const fs::path a = dir / ("a_" + est + ".json"), b = dir / ("b_" + est + ".json");
    const std::string common = "run --data " + data.string() + " --estimator " + est + " --seed 5 --bootstrap 100";
    if (cli(common + " --out " + a.string()) != 0 || cli(common + " --out " + b.string()) != 0) {
      deterministic = false;
      continue;
    }
    const std::string ta = slurp(a), tb = slurp(b);
    reports.push_back(ta);
    if (stripped(ta, a) != stripped(tb, b)) deterministic = false;
    ++compared;
  }

  bool config_rt = true;
  Rng gen(1010);
  for (int t = 0; t < 300; ++t) {
    const RunConfig c = random_config(gen);
    if (!(parse_run_config(serialize_run_config(c)) == c)) config_rt = false;
  }
  bool report_rt = !reports.empty();
  for (const auto& text : reports) {
    const RunReport r = RunReport::from_json(text);
    if (r.to_json() != text) report_rt = false;
    if (!(parse_run_config(serialize_run_config(r.config)) == r.config)) config_rt = false;
  }
  report(10, deterministic && config_rt && report_rt && compared == 9,
         std::to_string(compared) + "/9 estimators byte-identical=" + (deterministic ? "yes" : "no") +
             ", config round-trip=" + (config_rt ? "yes" : "no") + ", report round-trip=" + (report_rt ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::function<void()>> all = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                            criterion6, criterion7, criterion8, criterion9, criterion10};
  std::vector<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.push_back(std::atoi(argv[i]));
  if (chosen.empty())
    for (int i = 1; i <= 10; ++i) chosen.push_back(i);
  for (int id : chosen) {
    if (id < 1 || id > 10) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    try {
      all[static_cast<std::size_t>(id - 1)]();
    } catch (const std::exception& e) {
      report(id, false, std::string("error: ") + e.what());
    }
  }
  return failures == 0 ? 0 : 1;
}
