#include "support.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/folds.hpp"
#include "ateml/core/learner.hpp"
#include "ateml/core/loss.hpp"
#include "ateml/core/parallel.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace ateml;
using testing_support::vec;

TEST_CASE("rng streams are reproducible and split without shared state") {
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng parent(42, 3);
  const Rng child1 = parent.split(5);
  parent.next_u64();
  const Rng child2 = parent.split(5);
  CHECK(child1.key() == child2.key());
  CHECK(Rng(42, 3).split(5).key() != Rng(42, 3).split(6).key());
  CHECK(Rng(1, 0).key() != Rng(2, 0).key());
}

TEST_CASE("rng uniform, below and permutation stay in range") {
  Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7u);
  }
  auto p = rng.permutation(50);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(p[i] == i);
}

TEST_CASE("rng normal draws have unit moments") {
  Rng rng(123);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("make_folds examples") {
  SUBCASE("n=10 V=5 gives five folds of two") {
    const auto f = make_folds(10, 5, 7);
    for (auto s : f.fold_sizes()) CHECK(s == 2);
  }
  SUBCASE("n=10 V=10 is leave-one-out") {
    const auto f = make_folds(10, 10, 3);
    std::set<int> seen(f.fold_of.begin(), f.fold_of.end());
    CHECK(seen.size() == 10);
  }
  SUBCASE("n=7 V=3 sizes are {3,2,2}") {
    auto sizes = make_folds(7, 3, 1).fold_sizes();
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<Index>{2, 2, 3});
  }
}

TEST_CASE("make_folds errors") {
  CHECK_THROWS_AS(make_folds(5, 1, 0), InvalidArgument);
  CHECK_THROWS_AS(make_folds(3, 4, 0), InvalidArgument);
}

TEST_CASE("property: folds partition the rows") {
  Rng gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 2 + static_cast<Index>(gen.below(300));
    const int v = 2 + static_cast<int>(gen.below(static_cast<std::uint64_t>(std::min<Index>(n - 1, 20))));
    const auto f = make_folds(n, v, gen.next_u64());
    std::vector<int> count(n, 0);
    Index total = 0;
    for (int k = 0; k < v; ++k) {
      const auto rows = f.holdout_rows(k);
      CHECK(!rows.empty());
      for (auto r : rows) ++count[r];
      total += static_cast<Index>(rows.size());
      CHECK(static_cast<Index>(f.training_rows(k).size()) == n - static_cast<Index>(rows.size()));
    }
    CHECK(total == n);
    CHECK(std::all_of(count.begin(), count.end(), [](int c) { return c == 1; }));
    const auto sizes = f.fold_sizes();
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    CHECK(*hi - *lo <= 1);
  }
}

TEST_CASE("stratified folds spread both arms") {
  Eigen::VectorXd a(40);
  for (Index i = 0; i < 40; ++i) a[i] = i % 4 == 0 ? 1.0 : 0.0;
  const auto f = make_stratified_folds(a, 5, 11);
  for (int k = 0; k < 5; ++k) {
    int treated = 0;
    for (auto r : f.holdout_rows(k)) treated += a[r] == 1.0;
    CHECK(treated == 2);
  }
}

TEST_CASE("loss examples") {
  CHECK(loss_mse(vec({1, 1}), vec({1, 1})) == 0.0);
  CHECK(loss_mse(vec({0, 2}), vec({1, 1})) == doctest::Approx(1.0));
  CHECK(loss_mse(vec({0.5}), vec({0})) == doctest::Approx(0.25));
  CHECK(loss_logloss(vec({1 - 1e-12}), vec({1})) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(loss_logloss(vec({0.5, 0.5}), vec({0, 1})) == doctest::Approx(std::log(2.0)));
  CHECK(loss_logloss(vec({0.9}), vec({0})) == doctest::Approx(-std::log(0.1)));
  CHECK(std::isfinite(loss_logloss(vec({0.0}), vec({1}))));
  CHECK_THROWS_AS(loss_mse(vec({1}), vec({1, 2})), InvalidArgument);
}

TEST_CASE("property: mse is non-negative and zero iff equal") {
  Rng gen(77);
  for (int t = 0; t < 200; ++t) {
    const Index n = 1 + static_cast<Index>(gen.below(20));
    Eigen::VectorXd a = testing_support::random_vector(gen, n);
    Eigen::VectorXd b = a;
    CHECK(loss_mse(a, b) == 0.0);
    b[static_cast<Index>(gen.below(static_cast<std::uint64_t>(n)))] += 0.5 + gen.uniform();
    CHECK(loss_mse(a, b) > 0.0);
  }
}

TEST_CASE("property: MSE equals variance plus squared bias on a sample") {
  Rng gen(5);
  for (int t = 0; t < 50; ++t) {
    const int r = 5 + static_cast<int>(gen.below(200));
    const double truth = gen.normal();
    std::vector<double> est(r);
    for (auto& e : est) e = truth + 0.3 + gen.normal();
    const double m = mean(est);
    double mse = 0.0, var = 0.0;
    for (double e : est) {
      mse += (e - truth) * (e - truth) / r;
      var += (e - m) * (e - m) / r;
    }
    CHECK(std::abs(mse - (var + (m - truth) * (m - truth))) < 1e-10);
  }
}

TEST_CASE("cv_risk examples") {
  Rng gen(3);
  Eigen::MatrixXd x = testing_support::random_matrix(gen, 30, 2);
  const auto folds = make_folds(30, 5, 1);
  SUBCASE("constant target with ols is zero") {
    CHECK(cv_risk(LearnerSpec::defaults(LearnerFamily::ols), x, Eigen::VectorXd::Constant(30, 2.5), folds,
                  Loss::mse) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("lasso with huge lambda is the training-mean oracle") {
    Eigen::VectorXd y = testing_support::random_vector(gen, 30);
    LearnerSpec spec = LearnerSpec::defaults(LearnerFamily::lasso);
    spec.lambda = 1e6;
    double oracle = 0.0;
    for (int k = 0; k < 5; ++k) {
      const auto train = folds.training_rows(k);
      const auto hold = folds.holdout_rows(k);
      double m = 0.0;
      for (auto r : train) m += y[r];
      m /= static_cast<double>(train.size());
      double l = 0.0;
      for (auto r : hold) l += (y[r] - m) * (y[r] - m);
      oracle += l / static_cast<double>(hold.size()) / 5.0;
    }
    CHECK(cv_risk(spec, x, y, folds, Loss::mse) == doctest::Approx(oracle).epsilon(1e-10));
  }
  SUBCASE("noiseless line, n=4 V=2") {
    Eigen::MatrixXd x4(4, 1);
    x4 << 0, 1, 2, 3;
    Eigen::VectorXd y4 = x4.col(0);
    CHECK(cv_risk(LearnerSpec::defaults(LearnerFamily::ols), x4, y4, make_folds(4, 2, 5), Loss::mse) <
          1e-20);
  }
  SUBCASE("bit-identical on repeat") {
    Eigen::VectorXd y = testing_support::random_vector(gen, 30);
    LearnerSpec forest = LearnerSpec::defaults(LearnerFamily::forest);
    forest.n_trees = 20;
    forest.seed = 4;
    CHECK(cv_risk(forest, x, y, folds, Loss::mse) == cv_risk(forest, x, y, folds, Loss::mse));
  }
}

TEST_CASE("dataset invariants") {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  CHECK_NOTHROW(Dataset(x, {"x"}, vec({0, 1, 0}), vec({0, 1, 1})));
  CHECK_THROWS_AS(Dataset(x, {"x"}, vec({0, 2, 0}), vec({0, 1, 1})), InvalidArgument);
  CHECK_THROWS_AS(Dataset(x, {"x"}, vec({0, 1}), vec({0, 1, 1})), InvalidArgument);
  CHECK_THROWS_AS(Dataset(x, {"x"}, vec({0, 1, 0}), vec({0, 0.5, 1})), InvalidArgument);
  CHECK_THROWS_AS(Dataset(x, {"x", "y"}, vec({0, 1, 0}), vec({0, 1, 1})), InvalidArgument);
  Eigen::MatrixXd bad = x;
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(Dataset(bad, {"x"}, vec({0, 1, 0}), vec({0, 1, 1})), InvalidArgument);
  const auto d = Dataset::with_observed_bounds(x, {"x"}, vec({0, 1, 1}), vec({2, 5, 3}));
  CHECK(d.outcome_lo() == 2.0);
  CHECK(d.outcome_hi() == 5.0);
  CHECK(d.treated_count() == 2);
  const std::vector<Index> rows{2, 2, 0};
  const auto s = d.subset_rows(rows);
  CHECK(s.rows() == 3);
  CHECK(s.covariates()(0, 0) == 3.0);
  CHECK(s.outcome_hi() == 5.0);
}

TEST_CASE("parallel_for is order independent and rethrows the lowest failing index") {
  std::vector<double> out(1000);
  for (int threads : {1, 3}) {
    set_thread_count(threads);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = std::sqrt(static_cast<double>(i)); });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == std::sqrt(static_cast<double>(i)));
    try {
      parallel_for(100, [](std::size_t i) {
        if (i == 17 || i == 60) throw FitError("test", std::to_string(i));
      });
      FAIL("expected throw");
    } catch (const FitError& e) {
      CHECK(e.detail() == "17");
    }
  }
  set_thread_count(0);
}

TEST_CASE("learner spec strings round-trip") {
  for (auto fam : {LearnerFamily::mean, LearnerFamily::ols, LearnerFamily::logistic, LearnerFamily::lasso,
                   LearnerFamily::tree, LearnerFamily::forest, LearnerFamily::boost}) {
    const auto s = LearnerSpec::defaults(fam);
    CHECK(parse_learner_spec(s.to_string()) == s);
  }
  LearnerSpec b = LearnerSpec::defaults(LearnerFamily::boost);
  b.n_trees = 250;
  b.shrinkage = 0.05;
  b.max_depth = 3;
  CHECK(parse_learner_spec(b.to_string()) == b);
  CHECK_THROWS_AS(parse_learner_spec("nonsense"), InvalidArgument);
}
