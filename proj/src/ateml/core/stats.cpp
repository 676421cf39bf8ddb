#include "ateml/core/stats.hpp"

#include "ateml/core/error.hpp"

#include <algorithm>

namespace ateml {

double mean(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("core", "mean of empty sample");
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) throw InvalidArgument("core", "variance needs at least 2 values");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

double sample_sd(std::span<const double> values) { return std::sqrt(sample_variance(values)); }

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw InvalidArgument("core", "quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("core", "correlation: need equal lengths >= 2");
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double sxx = xc.squaredNorm();
  const double syy = yc.squaredNorm();
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return xc.dot(yc) / std::sqrt(sxx * syy);
}

InteractionExpansion::InteractionExpansion(const Eigen::MatrixXd& x) : base_cols_(x.cols()) {
  for (Eigen::Index a = 0; a < x.cols(); ++a) {
    for (Eigen::Index b = a + 1; b < x.cols(); ++b) {
      const Eigen::VectorXd prod = x.col(a).cwiseProduct(x.col(b));
      if (prod.size() > 0 && prod.maxCoeff() > prod.minCoeff()) pairs_.emplace_back(a, b);
    }
  }
}

Eigen::MatrixXd InteractionExpansion::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != base_cols_) throw InvalidArgument("core", "interaction expansion: column count mismatch");
  Eigen::MatrixXd out(x.rows(), base_cols_ + static_cast<Eigen::Index>(pairs_.size()));
  out.leftCols(base_cols_) = x;
  for (std::size_t k = 0; k < pairs_.size(); ++k)
    out.col(base_cols_ + static_cast<Eigen::Index>(k)) =
        x.col(pairs_[k].first).cwiseProduct(x.col(pairs_[k].second));
  return out;
}

}  // namespace ateml
