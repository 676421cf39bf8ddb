#include "support.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/folds.hpp"
#include "ateml/core/learner.hpp"
#include "ateml/learners/boost.hpp"
#include "ateml/learners/forest.hpp"
#include "ateml/learners/lasso.hpp"
#include "ateml/learners/linear.hpp"
#include "ateml/learners/logistic_lasso.hpp"
#include "ateml/learners/tree.hpp"

#include <doctest.h>

#include <cmath>

using namespace ateml;
using testing_support::random_matrix;
using testing_support::random_vector;
using testing_support::vec;

namespace {

// Independent check of the lasso optimality conditions on standardized columns.
double kkt_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LassoFit& fit) {
  const double n = static_cast<double>(x.rows());
  const Eigen::VectorXd r = y - fit.predict(x);
  double worst = 0.0;
  for (Index j = 0; j < x.cols(); ++j) {
    const double m = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - m).square().sum() / n);
    if (sd == 0.0) continue;
    const double g = ((x.col(j).array() - m) / sd).matrix().dot(r) / n;
    const double b = fit.coefficients[j] * sd;
    const double v = b == 0.0 ? std::max(0.0, std::abs(g) - fit.lambda) : std::abs(g - fit.lambda * (b > 0 ? 1 : -1));
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

TEST_CASE("ols examples") {
  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 2;
  const auto line = fit_ols(x, vec({0, 2, 4}));
  CHECK(line.intercept == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(line.coefficients[0] == doctest::Approx(2.0));

  Rng gen(1);
  Eigen::MatrixXd z = random_matrix(gen, 20, 3);
  const auto c = fit_ols(z, Eigen::VectorXd::Constant(20, 4.0));
  CHECK(c.intercept == doctest::Approx(4.0));
  CHECK(c.coefficients.cwiseAbs().maxCoeff() < 1e-10);

  Eigen::VectorXd y = random_vector(gen, 20);
  Eigen::MatrixXd dup(20, 2);
  dup << z.col(0), z.col(0);
  const auto single = fit_ols(z.leftCols(1), y);
  const auto twin = fit_ols(dup, y);
  CHECK((twin.linear_predictor(dup) - single.linear_predictor(z.leftCols(1))).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(twin.coefficients[0] == doctest::Approx(twin.coefficients[1]).epsilon(1e-9));
}

TEST_CASE("property: ols residuals are orthogonal to the design") {
  Rng gen(8);
  for (int t = 0; t < 50; ++t) {
    const Index n = 10 + static_cast<Index>(gen.below(100));
    const Index d = 1 + static_cast<Index>(gen.below(5));
    Eigen::MatrixXd x = random_matrix(gen, n, d);
    Eigen::VectorXd y = random_vector(gen, n);
    const auto fit = fit_ols(x, y);
    const Eigen::VectorXd r = y - fit.linear_predictor(x);
    CHECK(std::abs(r.sum()) < 1e-8);
    CHECK((x.transpose() * r).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("logistic examples") {
  Rng gen(2);
  SUBCASE("target independent of X") {
    const Index n = 400;
    Eigen::MatrixXd x = random_matrix(gen, n, 2);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) y[i] = i % 2;
    const auto fit = fit_logistic(x, y);
    CHECK(fit.converged);
    Eigen::MatrixXd design(n, 3);
    design << Eigen::VectorXd::Ones(n), x;
    CHECK((design.transpose() * (y - fit.predict_proba(x))).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(fit.model.coefficients.cwiseAbs().maxCoeff() < 0.3);
  }
  SUBCASE("perfect separation with a tiny ridge") {
    Eigen::MatrixXd x = random_matrix(gen, 60, 1);
    Eigen::VectorXd y(60);
    for (Index i = 0; i < 60; ++i) y[i] = x(i, 0) > 0 ? 1.0 : 0.0;
    const auto fit = fit_logistic(x, y, 1e-6);
    CHECK(std::isfinite(fit.model.coefficients[0]));
    const Eigen::VectorXd p = fit.predict_proba(x);
    for (Index i = 0; i < 60; ++i) CHECK((p[i] > 0.5) == (y[i] == 1.0));
    const auto unpenalized = fit_logistic(x, y);
    CHECK(unpenalized.separation_refit);
    CHECK(std::isfinite(unpenalized.model.coefficients[0]));
  }
  SUBCASE("all-zero covariate gives the intercept-only model") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(10, 1);
    const Eigen::VectorXd y = vec({1, 0, 0, 1, 1, 1, 0, 1, 0, 1});
    const auto p = fit_logistic(x, y).predict_proba(x);
    CHECK((p.array() - 0.6).abs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("property: converged logistic fits solve the score equations") {
  Rng gen(12);
  for (int t = 0; t < 40; ++t) {
    const Index n = 50 + static_cast<Index>(gen.below(300));
    const Index d = 1 + static_cast<Index>(gen.below(4));
    Eigen::MatrixXd x = random_matrix(gen, n, d);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) y[i] = gen.bernoulli(expit(0.5 * x(i, 0) - 0.2)) ? 1.0 : 0.0;
    const auto fit = fit_logistic(x, y);
    if (!fit.converged || fit.separation_refit) continue;
    Eigen::MatrixXd design(n, d + 1);
    design << Eigen::VectorXd::Ones(n), x;
    CHECK((design.transpose() * (y - fit.predict_proba(x))).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("lasso: lambda >= lambda_max gives all zeros and the mean") {
  Rng gen(3);
  Eigen::MatrixXd x = random_matrix(gen, 50, 5);
  Eigen::VectorXd y = x.col(0) * 2.0 + random_vector(gen, 50);
  const double lmax = lasso_lambda_max(x, y);
  for (double scale : {1.0, 1.5, 100.0}) {
    const auto fit = fit_lasso(x, y, lmax * scale);
    CHECK(fit.coefficients.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fit.intercept == doctest::Approx(y.mean()).epsilon(1e-12));
    CHECK(fit.active_set.empty());
  }
  CHECK(fit_lasso(x, y, lmax * 0.9).active_set.size() >= 1);
}

TEST_CASE("lasso: lambda = 0 is least squares") {
  Rng gen(4);
  Eigen::MatrixXd x = random_matrix(gen, 40, 3);
  Eigen::VectorXd y = random_vector(gen, 40);
  const auto l = fit_lasso(x, y, 0.0);
  const auto o = fit_ols(x, y);
  CHECK((l.predict(x) - o.linear_predictor(x)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lasso: single standardized covariate soft-threshold closed form") {
  const Index n = 8;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd e(n);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = i % 2 == 0 ? 1.0 : -1.0;
    e[i] = (i / 2) % 2 == 0 ? 1.0 : -1.0;  // orthogonal to x and to the constant
  }
  const Eigen::VectorXd y = 0.8 * x.col(0) + 0.3 * e;
  REQUIRE(x.col(0).dot(y) / n == doctest::Approx(0.8));
  const auto fit = fit_lasso(x, y, 0.3);
  CHECK(std::abs(fit.coefficients[0] - 0.5) < 1e-10);
  const auto flipped = fit_lasso(x, -y, 0.3);
  CHECK(std::abs(flipped.coefficients[0] + 0.5) < 1e-10);
  CHECK(fit_lasso(x, y, 0.8).coefficients[0] == 0.0);
}

TEST_CASE("property: lasso KKT conditions and path monotonicity") {
  Rng gen(5);
  for (int t = 0; t < 60; ++t) {
    const Index n = 20 + static_cast<Index>(gen.below(150));
    const Index d = 1 + static_cast<Index>(gen.below(15));
    Eigen::MatrixXd x = random_matrix(gen, n, d);
    Eigen::VectorXd y = random_vector(gen, n);
    y += x.col(0) * gen.normal();
    const double lmax = lasso_lambda_max(x, y);
    std::vector<double> grid;
    for (int k = 0; k < 8; ++k) grid.push_back(lmax * std::pow(0.6, k));
    const auto path = fit_lasso_path(x, y, grid);
    for (std::size_t k = 0; k < path.size(); ++k) {
      CHECK(kkt_oracle(x, y, path[k]) < 1e-6);
      if (k > 0) CHECK(path[k].l1_norm_standardized >= path[k - 1].l1_norm_standardized - 1e-8);
    }
  }
}

TEST_CASE("lasso_cv examples") {
  SUBCASE("grid of one value") {
    Rng gen(6);
    Eigen::MatrixXd x = random_matrix(gen, 30, 3);
    const auto cv = lasso_cv(x, random_vector(gen, 30), {0.05}, make_folds(30, 5, 1));
    CHECK(cv.lambda == 0.05);
  }
  SUBCASE("strong signal is selected") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      Rng gen(100 + s);
      Eigen::MatrixXd x = random_matrix(gen, 100, 10);
      Eigen::VectorXd y = 3.0 * x.col(0) + 0.1 * random_vector(gen, 100);
      const auto cv = lasso_cv(x, y, {}, make_folds(100, 10, s));
      CHECK(std::find(cv.fit.active_set.begin(), cv.fit.active_set.end(), 0) != cv.fit.active_set.end());
    }
  }
  SUBCASE("pure noise selects a near-empty model in most seeds") {
    int small = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
      Rng gen(200 + s);
      Eigen::MatrixXd x = random_matrix(gen, 100, 10);
      const auto cv = lasso_cv(x, random_vector(gen, 100), {}, make_folds(100, 10, s));
      small += cv.fit.active_set.size() <= 2;
    }
    CHECK(small >= 45);
  }
}

TEST_CASE("logistic lasso: intercept-only above lambda_max and KKT below") {
  Rng gen(7);
  const Index n = 200;
  Eigen::MatrixXd x = random_matrix(gen, n, 4);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) y[i] = gen.bernoulli(expit(x(i, 0))) ? 1.0 : 0.0;
  const double lmax = logistic_lasso_lambda_max(x, y);
  const auto top = fit_logistic_lasso(x, y, lmax * 1.01);
  CHECK(top.active_set.empty());
  CHECK((top.predict_proba(x).array() - y.mean()).abs().maxCoeff() < 1e-6);
  const auto fit = fit_logistic_lasso(x, y, lmax * 0.3);
  CHECK(!fit.active_set.empty());
  const Eigen::VectorXd r = y - fit.predict_proba(x);
  CHECK(std::abs(r.mean()) < 1e-6);
  for (Index j = 0; j < 4; ++j) {
    const double m = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - m).square().sum() / n);
    const double g = ((x.col(j).array() - m) / sd).matrix().dot(r) / n;
    const double b = fit.coefficients[j];
    if (b == 0.0) CHECK(std::abs(g) <= fit.lambda + 1e-6);
    else CHECK(std::abs(g - fit.lambda * (b > 0 ? 1 : -1)) < 1e-6);
  }
}

TEST_CASE("tree examples") {
  Rng gen(9);
  Eigen::MatrixXd x = random_matrix(gen, 30, 2);
  const auto flat = fit_tree(x, Eigen::VectorXd::Constant(30, 3.0), 8, 1);
  CHECK(flat.leaf_count() == 1);
  CHECK(flat.predict(x).isApproxToConstant(3.0));

  Eigen::MatrixXd b(6, 1);
  b << 0, 1, 0, 1, 1, 0;
  const auto stump = fit_tree(b, b.col(0), 1, 1);
  REQUIRE(stump.leaf_count() == 2);
  CHECK(stump.nodes()[0].feature == 0);
  CHECK(stump.nodes()[0].threshold == 0.5);
  CHECK(stump.predict(b) == b.col(0));

  Eigen::VectorXd y = random_vector(gen, 30);
  const auto root = fit_tree(x, y, 8, 30);
  CHECK(root.leaf_count() == 1);
  CHECK(root.predict(x)[0] == doctest::Approx(y.mean()));
}

TEST_CASE("tree split search matches an exhaustive oracle") {
  Rng gen(10);
  for (int t = 0; t < 30; ++t) {
    const Index n = 6 + static_cast<Index>(gen.below(30));
    Eigen::MatrixXd x = random_matrix(gen, n, 3);
    Eigen::VectorXd y = random_vector(gen, n);
    const auto stump = fit_tree(x, y, 1, 1);
    double best = (y.array() - y.mean()).square().sum();
    for (Index j = 0; j < 3; ++j)
      for (Index i = 0; i < n; ++i) {
        double sl = 0, sr = 0, ql = 0, qr = 0;
        int nl = 0, nr = 0;
        for (Index k = 0; k < n; ++k) {
          if (x(k, j) <= x(i, j)) sl += y[k], ql += y[k] * y[k], ++nl;
          else sr += y[k], qr += y[k] * y[k], ++nr;
        }
        if (nl == 0 || nr == 0) continue;
        best = std::min(best, ql - sl * sl / nl + qr - sr * sr / nr);
      }
    const double achieved = (y - stump.predict(x)).squaredNorm();
    CHECK(achieved == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("property: tree predictions are constant within a leaf") {
  Rng gen(11);
  Eigen::MatrixXd x = random_matrix(gen, 200, 3);
  Eigen::VectorXd y = x.col(0).array().sin().matrix() + random_vector(gen, 200);
  const auto tree = fit_tree(x, y, 4, 5);
  const Eigen::VectorXd p = tree.predict(x);
  for (Index i = 0; i < 200; ++i)
    for (Index k = i + 1; k < 200; ++k)
      if (tree.leaf_of(x, i) == tree.leaf_of(x, k)) CHECK(p[i] == p[k]);
  CHECK(tree.depth() <= 4);
}

TEST_CASE("forest examples") {
  Rng gen(13);
  Eigen::MatrixXd x = random_matrix(gen, 80, 3);
  Eigen::VectorXd y = x.col(1) + random_vector(gen, 80);
  ForestParams one;
  one.n_trees = 1;
  one.mtry = 3;
  one.min_leaf = 5;
  one.bootstrap = false;
  one.max_depth = 40;
  const auto f1 = fit_forest(x, y, one);
  CHECK(f1.predict(x) == fit_tree(x, y, 40, 5).predict(x));

  ForestParams p;
  p.n_trees = 30;
  p.seed = 5;
  CHECK(fit_forest(x, Eigen::VectorXd::Constant(80, -2.0), p).predict(x).isApproxToConstant(-2.0));

  const auto forest = fit_forest(x, y, p);
  Eigen::MatrixXd q = random_matrix(gen, 50, 3);
  Eigen::VectorXd manual = Eigen::VectorXd::Zero(50);
  for (const auto& t : forest.trees) manual += t.predict(q);
  manual /= static_cast<double>(forest.trees.size());
  CHECK((forest.predict(q) - manual).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fit_forest(x, y, p).predict(q) == forest.predict(q));
}

TEST_CASE("boost examples") {
  Rng gen(14);
  Eigen::MatrixXd x = random_matrix(gen, 60, 2);
  Eigen::VectorXd y = x.col(0) + 0.5 * random_vector(gen, 60);
  BoostParams p;
  p.n_trees = 1;
  p.shrinkage = 1.0;
  p.max_depth = 1;
  p.min_leaf = 1;
  const auto m1 = fit_boost(x, y, p);
  const Eigen::VectorXd centered = y.array() - y.mean();
  const Eigen::VectorXd oracle = (fit_tree(x, centered, 1, 1).predict(x).array() + y.mean()).matrix();
  CHECK((m1.predict(x) - oracle).cwiseAbs().maxCoeff() < 1e-12);

  p.shrinkage = 0.1;
  const auto m01 = fit_boost(x, y, p);
  const Eigen::VectorXd off1 = m1.predict(x).array() - y.mean();
  const Eigen::VectorXd off01 = m01.predict(x).array() - y.mean();
  CHECK((off01 - 0.1 * off1).cwiseAbs().maxCoeff() < 1e-12);

  BoostParams b;
  b.loss = BoostLoss::bernoulli;
  b.n_trees = 20;
  CHECK((fit_boost(x, Eigen::VectorXd::Ones(60), b).predict(x).array() - 1.0).abs().maxCoeff() < 1e-9);
  CHECK((fit_boost(x, Eigen::VectorXd::Zero(60), b).predict(x).array()).abs().maxCoeff() < 1e-9);
}

TEST_CASE("boost composition identity and stage hook") {
  Rng gen(15);
  Eigen::MatrixXd x = random_matrix(gen, 100, 3);
  Eigen::VectorXd y(100);
  for (Index i = 0; i < 100; ++i) y[i] = gen.bernoulli(expit(x(i, 0))) ? 1.0 : 0.0;
  BoostParams p;
  p.loss = BoostLoss::bernoulli;
  p.n_trees = 25;
  int calls = 0;
  const auto m = fit_boost(x, y, p, [&](int stage, const Eigen::VectorXd&) { calls = stage; });
  CHECK(calls == 25);
  Eigen::VectorXd f = Eigen::VectorXd::Constant(100, m.initial);
  for (const auto& t : m.trees) f += m.shrinkage * t.predict(x);
  CHECK((m.raw_predict(x) - f).cwiseAbs().maxCoeff() < 1e-12);
  for (Index i = 0; i < 100; ++i) CHECK(m.predict(x)[i] == doctest::Approx(expit(f[i])).epsilon(1e-12));
}

TEST_CASE("fit_learner dispatch and target kinds") {
  Rng gen(16);
  Eigen::MatrixXd x = random_matrix(gen, 120, 3);
  Eigen::VectorXd yb(120);
  for (Index i = 0; i < 120; ++i) yb[i] = gen.bernoulli(expit(x(i, 1))) ? 1.0 : 0.0;
  for (auto fam : {LearnerFamily::mean, LearnerFamily::ols, LearnerFamily::logistic, LearnerFamily::lasso,
                   LearnerFamily::tree, LearnerFamily::forest, LearnerFamily::boost}) {
    auto spec = LearnerSpec::defaults(fam);
    if (fam == LearnerFamily::forest) spec.n_trees = 20;
    const auto m = fit_learner(spec, x, yb, TargetKind::probability);
    const Eigen::VectorXd p = m->predict(x);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.maxCoeff() <= 1.0);
    CHECK(fit_learner(spec, x, yb, TargetKind::probability)->predict(x) == p);
  }
  CHECK_THROWS_AS(fit_learner(LearnerSpec::defaults(LearnerFamily::logistic), x, random_vector(gen, 120),
                              TargetKind::regression),
                  InvalidArgument);
  CHECK_THROWS_AS(fit_learner(LearnerSpec::defaults(LearnerFamily::ols), x, random_vector(gen, 120),
                              TargetKind::probability),
                  InvalidArgument);
}
