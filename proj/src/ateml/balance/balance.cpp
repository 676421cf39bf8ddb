#include "ateml/balance/balance.hpp"

#include "ateml/core/error.hpp"

#include <cmath>
#include <sstream>

namespace ateml {

PsFit clip_ps(Eigen::VectorXd raw, double trim, std::string learner) {
  if (!(trim > 0.0 && trim < 0.5)) throw InvalidArgument("balance", "trim must lie in (0, 0.5)");
  if (!raw.allFinite()) throw NumericError("balance", "propensity model produced non-finite scores");
  PsFit fit;
  fit.trim = trim;
  fit.learner = std::move(learner);
  fit.ps = raw.cwiseMax(trim).cwiseMin(1.0 - trim);
  Index clipped = 0;
  for (Index i = 0; i < raw.size(); ++i)
    if (raw[i] < trim || raw[i] > 1.0 - trim) ++clipped;
  fit.clipped_fraction = raw.size() ? static_cast<double>(clipped) / static_cast<double>(raw.size()) : 0.0;
  fit.positivity_warning = fit.clipped_fraction > 0.1;
  if (fit.positivity_warning) {
    std::ostringstream os;
    os << "positivity: " << fit.clipped_fraction * 100.0 << "% of propensity scores clipped at " << trim;
    fit.warnings.push_back(os.str());
  }
  fit.raw_ps = std::move(raw);
  return fit;
}

WeightVector iptw_weights(const Eigen::VectorXd& ps, const Eigen::VectorXd& a, WeightNormalization normalization) {
  if (ps.size() != a.size()) throw InvalidArgument("balance", "iptw_weights: length mismatch");
  WeightVector out;
  out.normalization = normalization;
  out.w.resize(ps.size());
  for (Index i = 0; i < ps.size(); ++i) out.w[i] = a[i] / ps[i] + (1.0 - a[i]) / (1.0 - ps[i]);
  if (normalization == WeightNormalization::mean_one_per_arm) {
    double sum[2] = {0.0, 0.0};
    double count[2] = {0.0, 0.0};
    for (Index i = 0; i < ps.size(); ++i) {
      const int arm = a[i] == 1.0 ? 1 : 0;
      sum[arm] += out.w[i];
      count[arm] += 1.0;
    }
    for (Index i = 0; i < ps.size(); ++i) {
      const int arm = a[i] == 1.0 ? 1 : 0;
      out.w[i] *= count[arm] / sum[arm];
    }
  }
  return out;
}

WeightVector iptw_weights(const PsFit& ps, const Eigen::VectorXd& a, WeightNormalization normalization) {
  return iptw_weights(ps.ps, a, normalization);
}

std::optional<double> smd(const Eigen::VectorXd& x, const Eigen::VectorXd& a, const Eigen::VectorXd* w) {
  if (x.size() != a.size() || (w && w->size() != x.size()))
    throw InvalidArgument("balance", "smd: length mismatch");
  double wsum[2] = {0.0, 0.0}, wx[2] = {0.0, 0.0}, sum[2] = {0.0, 0.0};
  Index count[2] = {0, 0};
  for (Index i = 0; i < x.size(); ++i) {
    const int arm = a[i] == 1.0 ? 1 : 0;
    const double wi = w ? (*w)[i] : 1.0;
    wsum[arm] += wi;
    wx[arm] += wi * x[i];
    sum[arm] += x[i];
    ++count[arm];
  }
  if (count[0] == 0 || count[1] == 0) throw InvalidArgument("balance", "smd: both arms must be non-empty");
  if (!(wsum[0] > 0.0) || !(wsum[1] > 0.0)) throw InvalidArgument("balance", "smd: arm weights must be positive");

  double ss[2] = {0.0, 0.0};
  const double mean[2] = {sum[0] / static_cast<double>(count[0]), sum[1] / static_cast<double>(count[1])};
  for (Index i = 0; i < x.size(); ++i) {
    const int arm = a[i] == 1.0 ? 1 : 0;
    ss[arm] += (x[i] - mean[arm]) * (x[i] - mean[arm]);
  }
  double var[2];
  for (int arm = 0; arm < 2; ++arm) var[arm] = count[arm] > 1 ? ss[arm] / static_cast<double>(count[arm] - 1) : 0.0;
  const double pooled = std::sqrt((var[0] + var[1]) / 2.0);
  const double m1 = wx[1] / wsum[1];
  const double m0 = wx[0] / wsum[0];
  if (pooled == 0.0) {
    const double scale = std::max({1.0, std::abs(m1), std::abs(m0)});
    if (std::abs(m1 - m0) <= 1e-12 * scale) return 0.0;
    return std::nullopt;
  }
  return (m1 - m0) / pooled;
}

AsamResult asam_detail(const Eigen::MatrixXd& x, const Eigen::VectorXd& a, const Eigen::VectorXd* w) {
  AsamResult out;
  double total = 0.0;
  Index used = 0;
  for (Index j = 0; j < x.cols(); ++j) {
    const Eigen::VectorXd col = x.col(j);
    const auto s = smd(col, a, w);
    if (!s) {
      out.degenerate.push_back(j);
      continue;
    }
    total += std::abs(*s);
    ++used;
  }
  if (used == 0) throw NumericError("balance", "asam: every covariate is degenerate");
  out.value = total / static_cast<double>(used);
  return out;
}

double asam(const Eigen::MatrixXd& x, const Eigen::VectorXd& a, const Eigen::VectorXd* w) {
  return asam_detail(x, a, w).value;
}

std::size_t BalanceReport::flagged(std::size_t label) const {
  std::size_t count = 0;
  for (const auto& row : smd)
    if (row[label] && std::abs(*row[label]) > kImbalanceFlag) ++count;
  return count;
}

std::string BalanceReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "covariate";
  for (const auto& label : labels) os << ",smd_" << label;
  os << '\n';
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    os << covariates[j];
    for (const auto& value : smd[j]) {
      os << ',';
      if (value) os << *value;
      else os << "degenerate";
    }
    os << '\n';
  }
  os << "ASAM";
  for (double value : asam) os << ',' << value;
  os << '\n';
  return os.str();
}

BalanceReport balance_table(const Dataset& data, const std::vector<BalanceAdjustment>& adjustments) {
  BalanceReport report;
  report.covariates = data.names();
  report.labels.push_back("unweighted");
  for (const auto& adj : adjustments) {
    if (adj.weights.size() != data.rows())
      throw InvalidArgument("balance", "balance_table: weights for '" + adj.label + "' have the wrong length");
    report.labels.push_back(adj.label);
  }
  const Eigen::MatrixXd& x = data.covariates();
  const Eigen::VectorXd& a = data.treatment();
  report.smd.assign(static_cast<std::size_t>(x.cols()), {});
  for (Index j = 0; j < x.cols(); ++j) {
    const Eigen::VectorXd col = x.col(j);
    auto& row = report.smd[static_cast<std::size_t>(j)];
    row.push_back(smd(col, a, nullptr));
    for (const auto& adj : adjustments) row.push_back(smd(col, a, &adj.weights));
  }
  report.asam.push_back(asam(x, a, nullptr));
  for (const auto& adj : adjustments) report.asam.push_back(asam(x, a, &adj.weights));
  return report;
}

}  // namespace ateml
