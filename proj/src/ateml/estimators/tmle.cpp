#include "ateml/core/error.hpp"
#include "ateml/core/stats.hpp"
#include "ateml/estimators/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ateml {
namespace {

constexpr double kBoundClip = 1e-6;
constexpr double kScoreTol = 1e-10;
constexpr double kStepTol = 1e-8;
constexpr int kMaxNewton = 100;

double scaled(double v, double lo, double range) {
  return std::clamp((v - lo) / range, kBoundClip, 1.0 - kBoundClip);
}

double range_of(double lo, double hi) {
  if (!(hi > lo)) throw InvalidArgument("estimators", "tmle: outcome bounds must satisfy lo < hi");
  return hi - lo;
}

}  // namespace

void tmle_apply(double epsilon, double lo, double hi, const Eigen::VectorXd& ps, Eigen::VectorXd& mu1,
                Eigen::VectorXd& mu0) {
  const double range = range_of(lo, hi);
  for (Index i = 0; i < ps.size(); ++i) {
    mu1[i] = lo + range * expit(logit(scaled(mu1[i], lo, range)) + epsilon / ps[i]);
    mu0[i] = lo + range * expit(logit(scaled(mu0[i], lo, range)) - epsilon / (1.0 - ps[i]));
  }
}

TmleUpdate tmle_fluctuate(const Dataset& data, const Eigen::VectorXd& ps, const Eigen::VectorXd& mu1,
                          const Eigen::VectorXd& mu0) {
  const Index n = data.rows();
  const double lo = data.outcome_lo(), hi = data.outcome_hi();
  const double range = range_of(lo, hi);
  const Eigen::VectorXd& a = data.treatment();
  Eigen::VectorXd ys(n), offset(n), h(n);
  for (Index i = 0; i < n; ++i) {
    ys[i] = (data.outcome()[i] - lo) / range;
    const bool t = a[i] == 1.0;
    offset[i] = logit(scaled(t ? mu1[i] : mu0[i], lo, range));
    h[i] = t ? 1.0 / ps[i] : -1.0 / (1.0 - ps[i]);
  }

  const auto score_at = [&](double eps) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += h[i] * (ys[i] - expit(offset[i] + eps * h[i]));
    return s / static_cast<double>(n);
  };
  const auto loglik_at = [&](double eps) {
    double ll = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double eta = offset[i] + eps * h[i];
      // log expit(eta) and log(1 - expit(eta)) in a stable form
      const double log_q = -std::log1p(std::exp(-std::abs(eta))) + std::min(eta, 0.0);
      const double log_1mq = log_q - eta;
      ll += ys[i] * log_q + (1.0 - ys[i]) * log_1mq;
    }
    return ll / static_cast<double>(n);
  };

  const auto info_at = [&](double eps) {
    double info = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double q = expit(offset[i] + eps * h[i]);
      info += h[i] * h[i] * q * (1.0 - q);
    }
    return info / static_cast<double>(n);
  };
  const auto newton_step = [&](double score, double info) {
    return info > 0.0 ? score / info : (score > 0.0 ? 1.0 : -1.0);
  };

  // converged when both the score and the Newton step are small
  double eps = 0.0;
  double score = score_at(eps);
  double step = newton_step(score, info_at(eps));
  int iter = 0;
  while (std::abs(score) > kScoreTol || std::abs(step) > kStepTol) {
    if (iter == kMaxNewton) {
      std::ostringstream os;
      os << "tmle: fluctuation did not converge in " << kMaxNewton << " Newton steps (epsilon=" << eps
         << ", score=" << score << ")";
      throw NumericError("estimators", os.str());
    }
    const double current = loglik_at(eps);
    const auto acceptable = [&](double e) {
      return loglik_at(e) >= current || std::abs(score_at(e)) < std::abs(score);
    };
    double next = eps + step;
    for (int halving = 0; halving < 60 && !acceptable(next); ++halving) {
      step *= 0.5;
      next = eps + step;
    }
    eps = next;
    ++iter;
    if (!std::isfinite(eps) || std::abs(eps) > kTmleEpsilonLimit) {
      std::ostringstream os;
      os << "tmle: no finite fluctuation (|epsilon| > " << kTmleEpsilonLimit << " after " << iter
         << " steps, epsilon=" << eps << ")";
      throw NumericError("estimators", os.str());
    }
    score = score_at(eps);
    step = newton_step(score, info_at(eps));
  }

  TmleUpdate out;
  out.epsilon = eps;
  out.iterations = iter;
  out.mu1 = mu1;
  out.mu0 = mu0;
  tmle_apply(eps, lo, hi, ps, out.mu1, out.mu0);
  out.mu_observed.resize(n);
  double s = 0.0;
  for (Index i = 0; i < n; ++i) {
    out.mu_observed[i] = a[i] == 1.0 ? out.mu1[i] : out.mu0[i];
    s += h[i] * (data.outcome()[i] - out.mu_observed[i]);
  }
  out.score = s / static_cast<double>(n);
  return out;
}

AteResult tmle_ate(const Dataset& data, const NuisanceFits& initial) {
  if (!initial.has_outcome() || initial.mu1.size() != data.rows() || initial.mu0.size() != data.rows())
    throw InvalidArgument("estimators", "outcome nuisances (mu1, mu0) are missing or have the wrong length");
  if (initial.ps.size() != data.rows()) throw InvalidArgument("estimators", "propensity scores have the wrong length");
  for (Index i = 0; i < initial.ps.size(); ++i)
    if (!(initial.ps[i] > 0.0 && initial.ps[i] < 1.0))
      throw InvalidArgument("estimators", "propensity scores must lie in (0, 1)");

  const TmleUpdate upd = tmle_fluctuate(data, initial.ps, initial.mu1, initial.mu0);
  const Index n = data.rows();
  const Eigen::VectorXd& a = data.treatment();
  Eigen::VectorXd diff = upd.mu1 - upd.mu0;
  double total = 0.0;
  for (Index i = 0; i < n; ++i) total += diff[i];
  AteResult r;
  r.method = "tmle";
  r.estimate = total / static_cast<double>(n);
  r.if_values.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double h = a[i] == 1.0 ? 1.0 / initial.ps[i] : -1.0 / (1.0 - initial.ps[i]);
    r.if_values[i] = h * (data.outcome()[i] - upd.mu_observed[i]) + diff[i] - r.estimate;
  }
  r.set_if_interval(if_se(r.if_values));
  r.diagnostics.emplace_back("epsilon", upd.epsilon);
  r.diagnostics.emplace_back("newton_iterations", upd.iterations);
  r.diagnostics.emplace_back("score", upd.score);
  r.diagnostics.emplace_back("clipped_fraction", initial.clipped_fraction);
  r.diagnostics.emplace_back("cross_fitted", initial.provenance == Provenance::cross_fitted ? 1.0 : 0.0);
  r.warnings = initial.warnings;
  return r;
}

}  // namespace ateml
