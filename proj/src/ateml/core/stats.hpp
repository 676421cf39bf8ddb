#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

namespace ateml {

inline double expit(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

double mean(std::span<const double> values);
// Sample variance with divisor n - 1.
double sample_variance(std::span<const double> values);
double sample_sd(std::span<const double> values);
// Linear-interpolation quantile (R type 7) of unsorted values.
double quantile(std::vector<double> values, double prob);
double median(std::vector<double> values);
// Pearson correlation; 0 when either side is constant.
double correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

constexpr double kZ975 = 1.959964;

// Pairwise products x_a * x_b (a < b, lexicographic), keeping only those
// columns that are non-constant on the data the expansion was built from.
class InteractionExpansion {
 public:
  InteractionExpansion() = default;
  explicit InteractionExpansion(const Eigen::MatrixXd& x);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs() const noexcept {
    return pairs_;
  }
  Eigen::Index base_cols() const noexcept { return base_cols_; }

 private:
  Eigen::Index base_cols_ = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs_;
};

}  // namespace ateml
