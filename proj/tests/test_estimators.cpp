#include "support.hpp"

#include "ateml/balance/matching.hpp"
#include "ateml/core/error.hpp"
#include "ateml/estimators/estimators.hpp"
#include "ateml/estimators/nuisance.hpp"

#include <doctest.h>

#include <cmath>

using namespace ateml;
using testing_support::random_matrix;
using testing_support::vec;

namespace {

Dataset tiny(const Eigen::VectorXd& a, const Eigen::VectorXd& y) {
  return Dataset::with_observed_bounds(Eigen::MatrixXd::Zero(a.size(), 1), {"x"}, a, y);
}

NuisanceFits fits_of(const Eigen::VectorXd& ps, const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu0) {
  NuisanceFits f;
  f.ps = ps;
  f.mu1 = mu1;
  f.mu0 = mu0;
  return f;
}

NuisanceFits parametric(const Dataset& d) { return fit_nuisances(NuisanceConfig{}, d); }

Dataset affine(const Dataset& d, double loc, double scale) {
  return Dataset::with_observed_bounds(d.covariates(), d.names(), d.treatment(),
                                       (loc + scale * d.outcome().array()).matrix());
}

}  // namespace

TEST_CASE("naive examples") {
  CHECK(naive_ate(tiny(vec({1, 1, 0, 0}), vec({1, 1, 0, 0.0}))).estimate == 1.0);
  CHECK(naive_ate(tiny(vec({1, 1, 0, 0}), vec({3, 5, 5, 3}))).estimate == 0.0);
  CHECK(naive_ate(tiny(vec({1, 1, 0, 0}), vec({0.4, 0.6, 0.1, 0.3}))).estimate == doctest::Approx(0.3));
  const auto r = naive_ate(tiny(vec({1, 1, 0, 0}), vec({1, 3, 0, 4})));
  CHECK(r.se == doctest::Approx(std::sqrt(2.0 / 2 + 8.0 / 2)));
  const auto lone = naive_ate(tiny(vec({1, 0, 0}), vec({1, 0, 2})));
  CHECK(std::isnan(lone.se));
  CHECK(lone.se_kind == SeKind::none);
}

TEST_CASE("reg_ate examples") {
  const Dataset d = tiny(vec({1, 0}), vec({1, 0.5}));
  CHECK(reg_ate(d, fits_of({}, vec({0.3, 0.7}), vec({0.3, 0.7}))).estimate == 0.0);
  CHECK(reg_ate(d, fits_of({}, vec({1.3, 1.7}), vec({0.3, 0.7}))).estimate == doctest::Approx(1.0));
  CHECK(reg_ate(d, fits_of({}, vec({1, 0.5}), vec({0.5, 0.5}))).estimate == doctest::Approx(0.25));
  CHECK(std::isnan(reg_ate(d, fits_of({}, vec({1, 0.5}), vec({0.5, 0.5}))).se));
}

TEST_CASE("iptw_ate examples") {
  CHECK(iptw_ate(tiny(vec({1, 1, 0, 0}), vec({1, 0, 1, 0})), Eigen::VectorXd::Constant(4, 0.5)).estimate == 0.0);
  const auto r = iptw_ate(tiny(vec({1, 0}), vec({2, 1})), vec({0.4, 0.4}));
  CHECK(r.estimate == doctest::Approx(0.5 * 2 / 0.4 - 0.5 * 1 / 0.6));
  CHECK(r.estimate == doctest::Approx(1.6666667));
  CHECK(r.if_values.size() == 2);
}

TEST_CASE("match_ate examples") {
  const Dataset twins = tiny(vec({1, 1, 0, 0}), vec({2, 5, 2, 5}));
  CHECK(match_ate(twins, ps_match(vec({0.3, 0.7, 0.3, 0.7}), twins.treatment())).estimate == 0.0);
  const Dataset pair = tiny(vec({1, 0}), vec({1, 0}));
  CHECK(match_ate(pair, ps_match(vec({0.5, 0.5}), pair.treatment())).estimate == 1.0);
  const Dataset star = tiny(vec({1, 1, 1, 0}), vec({3, 4, 5, 1}));
  const auto m = ps_match(vec({0.1, 0.5, 0.9, 0.4}), star.treatment());
  // Treated: 3-1, 4-1, 5-1; the control imputes its match.
  const double expected = ((3 - 1) + (4 - 1) + (5 - 1) + (star.outcome()[m.match[3]] - 1)) / 4.0;
  CHECK(match_ate(star, m).estimate == doctest::Approx(expected));
}

TEST_CASE("aiptw examples") {
  const Dataset d = Dataset(Eigen::MatrixXd::Zero(2, 1), {"x"}, vec({1, 0}), vec({1, 0}));
  const auto r = aiptw_ate(d, fits_of(vec({0.5, 0.5}), vec({0.5, 0.5}), vec({0.5, 0.5})));
  CHECK(r.diagnostic("psi1") == doctest::Approx(1.0));
  CHECK(r.diagnostic("psi0") == doctest::Approx(0.0));
  CHECK(r.estimate == doctest::Approx(1.0));
}

TEST_CASE("property: aiptw with zero outcome model equals iptw bit-exactly") {
  Rng gen(1);
  for (int t = 0; t < 200; ++t) {
    const Index n = 4 + static_cast<Index>(gen.below(300));
    Eigen::MatrixXd x = random_matrix(gen, n, 2);
    Eigen::VectorXd a = testing_support::random_treatment(gen, x, vec({0.5, -0.5}));
    Eigen::VectorXd y(n), ps(n);
    for (Index i = 0; i < n; ++i) {
      y[i] = gen.normal() * 3.0;
      ps[i] = 0.02 + 0.96 * gen.uniform();
    }
    const Dataset d = Dataset::with_observed_bounds(x, default_names(2), a, y);
    const auto ai = aiptw_ate(d, fits_of(ps, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)));
    const auto ip = iptw_ate(d, ps);
    CHECK(ai.estimate == ip.estimate);
    CHECK(ai.se == ip.se);
  }
}

TEST_CASE("aiptw with interpolating outcome model equals reg_ate") {
  const auto c = testing_support::confounded(2, 200);
  const auto& d = c.data;
  Eigen::VectorXd mu1 = Eigen::VectorXd::Constant(d.rows(), 0.3), mu0 = mu1;
  for (Index i = 0; i < d.rows(); ++i) (d.treated(i) ? mu1 : mu0)[i] = d.outcome()[i];
  const auto f = fits_of(c.ps, mu1, mu0);
  CHECK(aiptw_ate(d, f).estimate == doctest::Approx(reg_ate(d, f).estimate).epsilon(1e-12));
}

TEST_CASE("if_se examples") {
  CHECK(if_se(Eigen::VectorXd::Constant(5, 2.0)) == 0.0);
  CHECK(if_se(vec({-1, 1})) == doctest::Approx(1.0));
  Rng gen(3);
  const Eigen::VectorXd phi = testing_support::random_vector(gen, 50);
  CHECK(if_se(-3.0 * phi) == doctest::Approx(3.0 * if_se(phi)));
}

TEST_CASE("tmle: interpolating initial fit needs no fluctuation") {
  const auto c = testing_support::confounded(4, 200);
  const auto& d0 = c.data;
  const Dataset d(d0.covariates(), d0.names(), d0.treatment(), d0.outcome(), OutcomeKind::bounded_continuous,
                  d0.outcome_lo() - 5.0, d0.outcome_hi() + 5.0);
  Eigen::VectorXd mu1 = Eigen::VectorXd::Constant(d.rows(), 1.0), mu0 = mu1;
  for (Index i = 0; i < d.rows(); ++i) (d.treated(i) ? mu1 : mu0)[i] = d.outcome()[i];
  const auto f = fits_of(c.ps, mu1, mu0);
  const auto r = tmle_ate(d, f);
  CHECK(std::abs(r.diagnostic("epsilon")) < 1e-12);
  CHECK(r.estimate == doctest::Approx(reg_ate(d, f).estimate).epsilon(1e-10));
}

TEST_CASE("property: tmle solves its score equation and stays inside the bounds") {
  Rng gen(5);
  for (int t = 0; t < 100; ++t) {
    const Index n = 50 + static_cast<Index>(gen.below(451));
    const bool binary = t % 2 == 0;
    const auto c = testing_support::confounded(gen.next_u64(), n);
    const Dataset d = binary ? testing_support::binary_problem(gen.next_u64(), n) : c.data;
    const auto fits = parametric(d);
    const auto up = tmle_fluctuate(d, fits.ps, fits.mu1, fits.mu0);
    double score = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double a = d.treatment()[i];
      const double h = a / fits.ps[i] - (1 - a) / (1 - fits.ps[i]);
      score += h * (d.outcome()[i] - (a == 1.0 ? up.mu1[i] : up.mu0[i]));
    }
    CHECK(std::abs(score / n) < 1e-6);
    CHECK(up.mu1.minCoeff() > d.outcome_lo());
    CHECK(up.mu1.maxCoeff() < d.outcome_hi());
    CHECK(up.mu0.minCoeff() > d.outcome_lo());
    CHECK(up.mu0.maxCoeff() < d.outcome_hi());
    const auto r = tmle_ate(d, fits);
    CHECK(std::abs(r.if_values.mean()) < 1e-8);
    CHECK(r.ci_hi - r.ci_lo == doctest::Approx(2 * 1.959964 * r.se).epsilon(1e-14));
  }
}

TEST_CASE("tmle fails loudly on an absurd fluctuation") {
  // Y = A makes the score positive for every epsilon, so no finite solution exists.
  const auto c = testing_support::confounded(6, 100);
  const Index n = c.data.rows();
  const Dataset d(c.data.covariates(), c.data.names(), c.data.treatment(), c.data.treatment());
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(n, 0.5);
  CHECK_THROWS_AS(tmle_ate(d, fits_of(half, half, half)), NumericError);
}

TEST_CASE("property: influence values of aiptw average to zero") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto c = testing_support::confounded(100 + s, 150);
    const auto r = aiptw_ate(c.data, parametric(c.data));
    CHECK(std::abs(r.if_values.mean()) < 1e-8);
    CHECK(r.ci_hi - r.ci_lo == doctest::Approx(2 * 1.959964 * r.se).epsilon(1e-14));
  }
}

TEST_CASE("property: outcome affine equivariance") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto c = testing_support::confounded(200 + s, 300);
    const auto& d = c.data;
    const double loc = -4.0 + s, scale = 0.5 + 0.3 * s;
    const Dataset t = affine(d, loc, scale);
    auto check = [&](double base, double moved) { CHECK(std::abs(moved - scale * base) < 1e-8); };
    check(naive_ate(d).estimate, naive_ate(t).estimate);
    check(iptw_ate(d, c.ps).estimate, iptw_ate(affine(d, 0.0, scale), c.ps).estimate);
    const auto fd = parametric(d);
    const auto ft = parametric(t);
    check(reg_ate(d, fd).estimate, reg_ate(t, ft).estimate);
    check(aiptw_ate(d, fd).estimate, aiptw_ate(t, ft).estimate);
    check(tmle_ate(d, fd).estimate, tmle_ate(t, ft).estimate);
  }
}

TEST_CASE("dml collapses to aiptw without splitting") {
  const auto c = testing_support::confounded(7, 300);
  DmlConfig cfg;
  cfg.repetitions = 1;
  cfg.disable_splitting = true;
  const auto dml = dml_ate(c.data, cfg);
  const auto ai = aiptw_ate(c.data, parametric(c.data));
  CHECK(dml.estimate == ai.estimate);
  CHECK(dml.se == ai.se);
}

TEST_CASE("dml with identical repetition seeds equals a single repetition") {
  const auto c = testing_support::confounded(8, 300);
  DmlConfig one;
  one.repetitions = 1;
  one.seed = 5;
  DmlConfig two = one;
  two.repetitions = 2;
  two.identical_seeds = true;
  const auto r1 = dml_ate(c.data, one);
  const auto r2 = dml_ate(c.data, two);
  CHECK(r2.estimate == r1.estimate);
  CHECK(r2.se == doctest::Approx(r1.se).epsilon(1e-14));
  DmlConfig mean_agg = two;
  mean_agg.aggregate = Aggregate::mean;
  CHECK(dml_ate(c.data, mean_agg).estimate == doctest::Approx(r1.estimate).epsilon(1e-14));
}

TEST_CASE("dml default run is deterministic and reports its repetitions") {
  const auto c = testing_support::confounded(9, 300);
  DmlConfig cfg;
  cfg.seed = 3;
  const auto a = dml_ate(c.data, cfg);
  const auto b = dml_ate(c.data, cfg);
  CHECK(a.estimate == b.estimate);
  CHECK(a.diagnostic("repetitions") == 11);
  CHECK(a.diagnostic("estimate_min") <= a.estimate);
  CHECK(a.diagnostic("estimate_max") >= a.estimate);
  CHECK(std::abs(a.if_values.mean()) < 1e-8);
}

TEST_CASE("bootstrap examples") {
  const auto c = testing_support::confounded(10, 500);
  const auto flat = bootstrap_ci([](const Dataset&) { return 2.5; }, c.data, 200, 1);
  CHECK(flat.se == 0.0);
  CHECK(flat.ci_lo == 2.5);
  CHECK(flat.ci_hi == 2.5);

  const EstimatorClosure naive = [](const Dataset& d) { return naive_ate(d).estimate; };
  const auto b1 = bootstrap_ci(naive, c.data, 999, 7);
  const auto b2 = bootstrap_ci(naive, c.data, 999, 7);
  CHECK(b1.ci_lo == b2.ci_lo);
  CHECK(b1.ci_hi == b2.ci_hi);
  const double analytic = naive_ate(c.data).se;
  CHECK(std::abs(b1.se - analytic) < 0.2 * analytic);
  CHECK(b1.ci_lo < naive_ate(c.data).estimate);
  CHECK(b1.ci_hi > naive_ate(c.data).estimate);

  CHECK_THROWS_AS(bootstrap_ci(naive, c.data, 50, 1), InvalidArgument);
  const EstimatorClosure flaky = [](const Dataset& d) {
    if (d.outcome()[0] > d.outcome()[1]) throw FitError("test", "boom");
    return 0.0;
  };
  CHECK_THROWS_AS(bootstrap_ci(flaky, c.data, 100, 1), FitError);
}
