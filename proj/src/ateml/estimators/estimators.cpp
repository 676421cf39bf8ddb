#include "ateml/estimators/estimators.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/stats.hpp"

#include <cmath>
#include <limits>

namespace ateml {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void no_interval(AteResult& r) {
  r.se = kNaN;
  r.ci_lo = kNaN;
  r.ci_hi = kNaN;
  r.se_kind = SeKind::none;
}

double ordered_mean(const Eigen::VectorXd& v) {
  double total = 0.0;
  for (Index i = 0; i < v.size(); ++i) total += v[i];
  return total / static_cast<double>(v.size());
}

void check_ps(const Dataset& data, const Eigen::VectorXd& ps) {
  if (ps.size() != data.rows()) throw InvalidArgument("estimators", "propensity scores have the wrong length");
  for (Index i = 0; i < ps.size(); ++i)
    if (!(ps[i] > 0.0 && ps[i] < 1.0)) throw InvalidArgument("estimators", "propensity scores must lie in (0, 1)");
}

void check_outcome(const Dataset& data, const NuisanceFits& fits) {
  if (!fits.has_outcome() || fits.mu1.size() != data.rows() || fits.mu0.size() != data.rows())
    throw InvalidArgument("estimators", "outcome nuisances (mu1, mu0) are missing or have the wrong length");
}

void add_provenance(AteResult& r, const NuisanceFits& fits) {
  r.diagnostics.emplace_back("cross_fitted", fits.provenance == Provenance::cross_fitted ? 1.0 : 0.0);
  r.warnings.insert(r.warnings.end(), fits.warnings.begin(), fits.warnings.end());
}

}  // namespace

std::string_view to_string(SeKind kind) noexcept {
  switch (kind) {
    case SeKind::influence_function: return "influence_function";
    case SeKind::analytic: return "analytic";
    case SeKind::bootstrap: return "bootstrap";
    case SeKind::none: return "none";
  }
  return "none";
}

double AteResult::diagnostic(const std::string& key) const {
  for (const auto& [k, v] : diagnostics)
    if (k == key) return v;
  return kNaN;
}

void AteResult::set_if_interval(double se_value) {
  se = se_value;
  ci_lo = estimate - kZ975 * se;
  ci_hi = estimate + kZ975 * se;
  se_kind = SeKind::influence_function;
}

double if_se(const Eigen::VectorXd& phi) {
  if (phi.size() < 2) throw InvalidArgument("estimators", "if_se needs at least two values");
  return std::sqrt(sample_variance(as_span(phi)) / static_cast<double>(phi.size()));
}

AteResult naive_ate(const Dataset& data) {
  std::vector<double> arm[2];
  for (Index i = 0; i < data.rows(); ++i) arm[data.treated(i) ? 1 : 0].push_back(data.outcome()[i]);
  if (arm[0].empty() || arm[1].empty()) throw InvalidArgument("estimators", "naive_ate: both arms must be non-empty");
  AteResult r;
  r.method = "naive";
  r.estimate = mean(arm[1]) - mean(arm[0]);
  if (arm[0].size() >= 2 && arm[1].size() >= 2) {
    r.se = std::sqrt(sample_variance(arm[1]) / static_cast<double>(arm[1].size()) +
                     sample_variance(arm[0]) / static_cast<double>(arm[0].size()));
    r.ci_lo = r.estimate - kZ975 * r.se;
    r.ci_hi = r.estimate + kZ975 * r.se;
    r.se_kind = SeKind::analytic;
  } else {
    no_interval(r);
  }
  return r;
}

AteResult reg_ate(const Dataset& data, const NuisanceFits& fits) {
  check_outcome(data, fits);
  AteResult r;
  r.method = "reg";
  const Eigen::VectorXd diff = fits.mu1 - fits.mu0;
  r.estimate = ordered_mean(diff);
  no_interval(r);
  add_provenance(r, fits);
  return r;
}

AteResult iptw_ate(const Dataset& data, const Eigen::VectorXd& ps) {
  check_ps(data, ps);
  const Eigen::VectorXd& a = data.treatment();
  const Eigen::VectorXd& y = data.outcome();
  const Index n = data.rows();
  Eigen::VectorXd unit(n);
  for (Index i = 0; i < n; ++i) unit[i] = a[i] * y[i] / ps[i] - (1.0 - a[i]) * y[i] / (1.0 - ps[i]);
  AteResult r;
  r.method = "iptw";
  r.estimate = ordered_mean(unit);
  r.if_values = unit.array() - r.estimate;
  r.set_if_interval(if_se(r.if_values));
  r.diagnostics.emplace_back("ps_treated_as_known", 1.0);
  return r;
}

AteResult match_ate(const Dataset& data, const MatchResult& matches) {
  const Index n = data.rows();
  if (static_cast<Index>(matches.match.size()) != n) throw InvalidArgument("estimators", "match_ate: match length");
  const Eigen::VectorXd& y = data.outcome();
  Eigen::VectorXd diff(n);
  for (Index i = 0; i < n; ++i) {
    const Index j = matches.match[static_cast<std::size_t>(i)];
    if (j < 0 || j >= n || data.treated(j) == data.treated(i))
      throw InvalidArgument("estimators", "match_ate: matched unit is not from the opposite arm");
    diff[i] = data.treated(i) ? y[i] - y[j] : y[j] - y[i];
  }
  AteResult r;
  r.method = "match";
  r.estimate = ordered_mean(diff);
  no_interval(r);
  return r;
}

AteResult aiptw_ate(const Dataset& data, const NuisanceFits& fits) {
  check_outcome(data, fits);
  check_ps(data, fits.ps);
  const Eigen::VectorXd& a = data.treatment();
  const Eigen::VectorXd& y = data.outcome();
  const Eigen::VectorXd& p = fits.ps;
  const Index n = data.rows();
  Eigen::VectorXd unit(n), arm1(n), arm0(n);
  for (Index i = 0; i < n; ++i) {
    arm1[i] = a[i] * (y[i] - fits.mu1[i]) / p[i] + fits.mu1[i];
    arm0[i] = (1.0 - a[i]) * (y[i] - fits.mu0[i]) / (1.0 - p[i]) + fits.mu0[i];
    unit[i] = arm1[i] - arm0[i];
  }
  AteResult r;
  r.method = "aiptw";
  r.estimate = ordered_mean(unit);
  r.if_values = unit.array() - r.estimate;
  r.set_if_interval(if_se(r.if_values));
  r.diagnostics.emplace_back("psi1", ordered_mean(arm1));
  r.diagnostics.emplace_back("psi0", ordered_mean(arm0));
  r.diagnostics.emplace_back("clipped_fraction", fits.clipped_fraction);
  add_provenance(r, fits);
  return r;
}

}  // namespace ateml
