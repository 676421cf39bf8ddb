#include "ateml/dgp/dgp.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/parallel.hpp"
#include "ateml/core/rng.hpp"
#include "ateml/core/stats.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>

namespace ateml {
namespace {

constexpr std::uint64_t kPopulationSeed = 0x706f70756c617469ULL;

double coef(const std::vector<double>& v, Index j) {
  return v.empty() ? 0.0 : v[static_cast<std::size_t>(j)];
}

double draw_covariate(const CovariateSpec& c, Rng& rng) {
  if (c.law == CovariateLaw::bernoulli) return rng.uniform() < c.q ? 1.0 : 0.0;
  double z = rng.normal();
  while (std::abs(z) > kNormalTruncation) z = rng.normal();
  return z;
}

double ps_logit(const DgpSpec& s, const double* x) {
  double eta = s.ps_intercept;
  for (Index j = 0; j < s.d(); ++j) eta += coef(s.ps_coefficients, j) * x[j] + coef(s.ps_squares, j) * x[j] * x[j];
  return eta;
}

double outcome_index(const DgpSpec& s, const double* x) {
  double g = s.outcome_intercept;
  for (Index j = 0; j < s.d(); ++j)
    g += coef(s.outcome_coefficients, j) * x[j] + coef(s.outcome_squares, j) * x[j] * x[j];
  return g;
}

// Range of b*x + c*x^2 over the support of one covariate.
std::pair<double, double> term_range(const CovariateSpec& cov, double b, double c) {
  if (cov.law == CovariateLaw::bernoulli) return {std::min(0.0, b + c), std::max(0.0, b + c)};
  const double t = kNormalTruncation;
  std::vector<double> points{-t, t};
  if (c != 0.0) {
    const double vertex = -b / (2.0 * c);
    if (std::abs(vertex) <= t) points.push_back(vertex);
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : points) {
    const double v = b * x + c * x * x;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

std::vector<CovariateSpec> normals(int count) { return std::vector<CovariateSpec>(static_cast<std::size_t>(count)); }

std::string spec_key(const DgpSpec& s) {
  std::ostringstream os;
  os.precision(17);
  os << s.ps_intercept << '|' << s.outcome_intercept << '|' << s.tau << '|' << static_cast<int>(s.outcome_kind);
  for (const auto& c : s.covariates) os << '|' << static_cast<int>(c.law) << ':' << c.q;
  for (const auto* v : {&s.ps_coefficients, &s.ps_squares, &s.outcome_coefficients, &s.outcome_squares}) {
    os << '#';
    for (double x : *v) os << x << ',';
  }
  return os.str();
}

}  // namespace

std::pair<double, double> DgpSpec::ps_logit_range() const {
  double lo = ps_intercept, hi = ps_intercept;
  for (Index j = 0; j < d(); ++j) {
    const auto [a, b] = term_range(covariates[static_cast<std::size_t>(j)], coef(ps_coefficients, j), coef(ps_squares, j));
    lo += a;
    hi += b;
  }
  return {lo, hi};
}

void DgpSpec::validate() const {
  const auto fail = [&](const std::string& why) { throw InvalidArgument("dgp", "spec '" + name + "': " + why); };
  if (n < 10) fail("n must be at least 10");
  if (covariates.empty()) fail("at least one covariate is required");
  for (const auto* v : {&ps_coefficients, &ps_squares, &outcome_coefficients, &outcome_squares})
    if (!v->empty() && static_cast<Index>(v->size()) != d()) fail("coefficient vector length differs from d");
  for (const auto& c : covariates)
    if (c.law == CovariateLaw::bernoulli && !(c.q > 0.0 && c.q < 1.0)) fail("bernoulli q must lie in (0, 1)");
  if (!(noise >= 0.0) || !std::isfinite(tau)) fail("noise must be non-negative and tau finite");
  const auto [lo, hi] = ps_logit_range();
  if (expit(lo) < kPsLower || expit(hi) > kPsUpper)
    fail("implied propensity score leaves [0.05, 0.95] on the covariate support");
}

PopulationAte population_ate(const DgpSpec& spec) {
  spec.validate();
  if (spec.outcome_kind == OutcomeKind::bounded_continuous) return {spec.tau, 0.0};
  static std::mutex mutex;
  static std::map<std::string, PopulationAte> cache;
  const std::string key = spec_key(spec);
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  Rng rng(kPopulationSeed);
  std::vector<double> x(static_cast<std::size_t>(spec.d()));
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < kPopulationDraws; ++r) {
    for (Index j = 0; j < spec.d(); ++j) x[static_cast<std::size_t>(j)] = draw_covariate(spec.covariates[static_cast<std::size_t>(j)], rng);
    const double g = outcome_index(spec, x.data());
    const double diff = expit(g + spec.tau) - expit(g);
    sum += diff;
    sum_sq += diff * diff;
  }
  const double m = static_cast<double>(kPopulationDraws);
  const double mean = sum / m;
  const double var = (sum_sq - m * mean * mean) / (m - 1.0);
  const PopulationAte out{mean, std::sqrt(std::max(0.0, var) / m)};
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(key, out);
  return out;
}

GeneratedData gen_dataset(const DgpSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Index n = spec.n, d = spec.d();
  Rng rng(seed, 0x646770ULL);
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd a(n), y(n), ps(n), y0(n), y1(n);
  std::vector<double> row(static_cast<std::size_t>(d));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      row[static_cast<std::size_t>(j)] = draw_covariate(spec.covariates[static_cast<std::size_t>(j)], rng);
      x(i, j) = row[static_cast<std::size_t>(j)];
    }
    ps[i] = expit(ps_logit(spec, row.data()));
    a[i] = rng.uniform() < ps[i] ? 1.0 : 0.0;
    const double g = outcome_index(spec, row.data());
    if (spec.outcome_kind == OutcomeKind::binary) {
      const double u = rng.uniform();
      y0[i] = u < expit(g) ? 1.0 : 0.0;
      y1[i] = u < expit(g + spec.tau) ? 1.0 : 0.0;
    } else {
      y0[i] = g + spec.noise * rng.normal();
      y1[i] = y0[i] + spec.tau;
    }
    y[i] = y0[i] * (1.0 - a[i]) + y1[i] * a[i];
  }
  const PopulationAte truth = population_ate(spec);
  auto names = default_names(d);
  Dataset data = spec.outcome_kind == OutcomeKind::binary
                     ? Dataset(std::move(x), std::move(names), std::move(a), std::move(y))
                     : Dataset::with_observed_bounds(std::move(x), std::move(names), std::move(a), std::move(y));
  return GeneratedData{std::move(data), truth.ate, truth.se, std::move(ps), std::move(y0), std::move(y1)};
}

const std::vector<DgpSpec>& builtin_specs() {
  static const std::vector<DgpSpec> specs = [] {
    // x1-x3 normal confounders, x4 normal outcome-only, x5 Bernoulli(0.4)
    // treatment-only, x6 Bernoulli(0.5) noise.
    std::vector<CovariateSpec> six = normals(4);
    six.push_back({CovariateLaw::bernoulli, 0.4});
    six.push_back({CovariateLaw::bernoulli, 0.5});

    DgpSpec randomized;
    randomized.name = "randomized_linear";
    randomized.covariates = six;
    randomized.ps_coefficients = {0, 0, 0, 0, 0, 0};
    randomized.outcome_intercept = 1.0;
    randomized.outcome_coefficients = {1.0, 1.0, -1.0, 0.8, 0.0, 0.0};

    DgpSpec confounded = randomized;
    confounded.name = "confounded_linear";
    confounded.ps_coefficients = {0.4, -0.35, 0.3, 0.0, 0.25, 0.0};

    DgpSpec binary = confounded;
    binary.name = "confounded_binary";
    binary.outcome_kind = OutcomeKind::binary;
    binary.outcome_intercept = -0.5;
    binary.outcome_coefficients = {0.6, 0.5, -0.5, 0.4, 0.0, 0.0};
    binary.tau = 0.8;
    binary.noise = 0.0;

    DgpSpec sparse;
    sparse.name = "sparse_highdim";
    sparse.covariates = normals(50);
    sparse.ps_coefficients.assign(50, 0.0);
    sparse.ps_coefficients[0] = 0.4;
    sparse.ps_coefficients[1] = -0.4;
    sparse.ps_coefficients[2] = 0.35;
    sparse.outcome_intercept = 1.0;
    sparse.outcome_coefficients.assign(50, 0.0);
    sparse.outcome_coefficients[0] = 1.0;
    sparse.outcome_coefficients[1] = 1.0;
    sparse.outcome_coefficients[2] = -1.0;
    sparse.outcome_coefficients[3] = 0.5;
    sparse.outcome_coefficients[4] = 0.5;

    std::vector<DgpSpec> out{randomized, confounded, binary, sparse};
    for (const auto& s : out) s.validate();
    return out;
  }();
  return specs;
}

const DgpSpec& builtin_spec(const std::string& name) {
  for (const auto& s : builtin_specs())
    if (s.name == name) return s;
  std::string catalog;
  for (const auto& s : builtin_specs()) catalog += (catalog.empty() ? "" : ", ") + s.name;
  throw InvalidArgument("dgp", "unknown spec '" + name + "' (available: " + catalog + ")");
}

McReport mc_eval_many(const std::vector<std::pair<std::string, McEstimator>>& estimators, const DgpSpec& spec,
                      int replications, std::uint64_t seed) {
  if (replications < 2) throw InvalidArgument("dgp", "mc_eval: R must be at least 2");
  if (estimators.empty()) throw InvalidArgument("dgp", "mc_eval: no estimators");
  spec.validate();
  const double truth = population_ate(spec).ate;
  const std::size_t r_count = static_cast<std::size_t>(replications);
  const std::size_t m = estimators.size();
  std::vector<std::vector<std::optional<AteResult>>> results(r_count, std::vector<std::optional<AteResult>>(m));
  std::vector<std::vector<std::string>> reasons(r_count, std::vector<std::string>(m));
  const Rng root(seed, 0x6d63ULL);
  parallel_for(r_count, [&](std::size_t r) {
    const GeneratedData gen = gen_dataset(spec, root.split(r).key());
    for (std::size_t k = 0; k < m; ++k) {
      try {
        results[r][k] = estimators[k].second(gen);
      } catch (const std::exception& e) {
        reasons[r][k] = e.what();
      }
    }
  });

  McReport report;
  report.spec = spec.name;
  report.replications = replications;
  for (std::size_t k = 0; k < m; ++k) {
    McRow row;
    row.estimator = estimators[k].first;
    row.replications = replications;
    row.true_ate = truth;
    bool usable_ci = true;
    int covered = 0;
    double width = 0.0;
    for (std::size_t r = 0; r < r_count; ++r) {
      const auto& res = results[r][k];
      if (!res || !std::isfinite(res->estimate)) {
        ++row.failures;
        row.failure_reasons.push_back(res ? "non-finite estimate" : reasons[r][k]);
        continue;
      }
      row.estimates.push_back(res->estimate);
      if (!(std::isfinite(res->se) && res->se > 0.0 && std::isfinite(res->ci_lo) && std::isfinite(res->ci_hi))) {
        usable_ci = false;
        continue;
      }
      if (res->ci_lo <= truth && truth <= res->ci_hi) ++covered;
      width += res->ci_hi - res->ci_lo;
    }
    const double ok = static_cast<double>(row.estimates.size());
    if (row.estimates.empty()) {
      row.bias = row.mc_se = row.variance = row.rmse = row.coverage = row.mean_ci_width =
          std::numeric_limits<double>::quiet_NaN();
    } else {
      double mean_est = 0.0;
      for (double e : row.estimates) mean_est += e;
      mean_est /= ok;
      row.bias = mean_est - truth;
      double ss = 0.0, sq_err = 0.0;
      for (double e : row.estimates) {
        ss += (e - mean_est) * (e - mean_est);
        sq_err += (e - truth) * (e - truth);
      }
      row.variance = ss / ok;
      row.mc_se = row.estimates.size() > 1 ? std::sqrt(ss / (ok - 1.0) / ok) : std::numeric_limits<double>::quiet_NaN();
      row.rmse = std::sqrt(sq_err / ok);
      if (usable_ci) {
        row.coverage = covered / ok;
        row.mean_ci_width = width / ok;
      } else {
        row.coverage = row.mean_ci_width = std::numeric_limits<double>::quiet_NaN();
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

McRow mc_eval(const McEstimator& estimator, const DgpSpec& spec, int replications, std::uint64_t seed,
              const std::string& name) {
  return mc_eval_many({{name, estimator}}, spec, replications, seed).rows.front();
}

std::string McReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "estimator,replications,failures,true_ate,bias,mc_se,rmse,coverage,mean_ci_width\n";
  for (const auto& r : rows)
    os << r.estimator << ',' << r.replications << ',' << r.failures << ',' << r.true_ate << ',' << r.bias << ','
       << r.mc_se << ',' << r.rmse << ',' << r.coverage << ',' << r.mean_ci_width << '\n';
  return os.str();
}

}  // namespace ateml
