#pragma once

#include "ateml/core/dataset.hpp"
#include "ateml/core/rng.hpp"
#include "ateml/core/stats.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace testing_support {

using ateml::Index;

inline Eigen::MatrixXd random_matrix(ateml::Rng& rng, Index n, Index d) {
  Eigen::MatrixXd x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = rng.normal();
  return x;
}

inline Eigen::VectorXd random_vector(ateml::Rng& rng, Index n) {
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Binary treatment with P(A=1|X) = expit(x * gamma), forced to contain both arms
// with at least two rows each.
inline Eigen::VectorXd random_treatment(ateml::Rng& rng, const Eigen::MatrixXd& x, const Eigen::VectorXd& gamma) {
  const Index n = x.rows();
  Eigen::VectorXd a(n);
  for (Index i = 0; i < n; ++i) a[i] = rng.bernoulli(ateml::expit(x.row(i).dot(gamma))) ? 1.0 : 0.0;
  a[0] = 1.0;
  a[1] = 1.0;
  a[2] = 0.0;
  a[3] = 0.0;
  return a;
}

struct Confounded {
  ateml::Dataset data;
  Eigen::VectorXd ps;
  double tau;
};

// Small confounded linear problem: logit PS and linear outcome in X, effect tau.
inline Confounded confounded(std::uint64_t seed, Index n, Index d = 3, double tau = 1.0) {
  ateml::Rng rng(seed, 99);
  Eigen::MatrixXd x = random_matrix(rng, n, d);
  Eigen::VectorXd gamma = Eigen::VectorXd::Constant(d, 0.4);
  Eigen::VectorXd ps(n);
  for (Index i = 0; i < n; ++i) ps[i] = ateml::expit(x.row(i).dot(gamma));
  Eigen::VectorXd a = random_treatment(rng, x, gamma);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) y[i] = 1.0 + x.row(i).sum() + tau * a[i] + rng.normal();
  auto data = ateml::Dataset::with_observed_bounds(x, ateml::default_names(d), a, y);
  return {std::move(data), ps, tau};
}

inline ateml::Dataset binary_problem(std::uint64_t seed, Index n, Index d = 3) {
  ateml::Rng rng(seed, 7);
  Eigen::MatrixXd x = random_matrix(rng, n, d);
  Eigen::VectorXd a = random_treatment(rng, x, Eigen::VectorXd::Constant(d, 0.3));
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) y[i] = rng.bernoulli(ateml::expit(0.5 * x(i, 0) + 0.7 * a[i] - 0.2)) ? 1.0 : 0.0;
  y[0] = 1.0;
  y[1] = 0.0;
  y[2] = 1.0;
  y[3] = 0.0;
  return ateml::Dataset(x, ateml::default_names(d), a, y);
}

}  // namespace testing_support
