#include "ateml/superlearner/superlearner.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/parallel.hpp"
#include "ateml/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace ateml {
namespace {

FoldAssignment folds_for(const Eigen::VectorXd& y, int v, std::uint64_t seed, TargetKind kind) {
  if (kind == TargetKind::probability) return make_stratified_folds(y, v, seed);
  return make_folds(y.size(), v, seed);
}

LearnerSpec boost_spec(int trees, double shrinkage, int depth) {
  LearnerSpec s = LearnerSpec::defaults(LearnerFamily::boost);
  s.n_trees = trees;
  s.shrinkage = shrinkage;
  s.max_depth = depth;
  return s;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& w, Loss loss) {
  const Eigen::VectorXd p = z * w;
  return evaluate_loss(loss, p, y);
}

Eigen::Index best_vertex(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, Loss loss) {
  Eigen::Index best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < z.cols(); ++k) {
    const Eigen::VectorXd col = z.col(k);
    const double value = evaluate_loss(loss, col, y);
    if (value < best_value) {
      best_value = value;
      best = k;
    }
  }
  return best;
}

// Least squares on the affine set {w_P : sum w_P = 1}, min-norm when singular.
Eigen::VectorXd affine_ls(const Eigen::MatrixXd& gram, const Eigen::VectorXd& zty, const std::vector<Eigen::Index>& free) {
  const Eigen::Index p = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(p + 1, p + 1);
  Eigen::VectorXd rhs(p + 1);
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = 0; b < p; ++b) kkt(a, b) = gram(free[a], free[b]);
    kkt(a, p) = 1.0;
    kkt(p, a) = 1.0;
    rhs[a] = zty[free[a]];
  }
  rhs[p] = 1.0;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
  cod.setThreshold(1e-12);
  return cod.solve(rhs).head(p);
}

// Active-set solver for min ||Zw - y||^2 over the simplex, started at the
// best vertex so every iterate is at least as good as any single column.
Eigen::VectorXd simplex_least_squares(const Eigen::MatrixXd& z, const Eigen::VectorXd& y) {
  const Eigen::Index m = z.cols();
  const Eigen::MatrixXd gram = z.transpose() * z;
  const Eigen::VectorXd zty = z.transpose() * y;
  const double scale = std::max(1.0, gram.diagonal().maxCoeff());
  const double tol = 1e-12 * scale;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  const Eigen::Index start = best_vertex(z, y, Loss::mse);
  w[start] = 1.0;
  std::vector<Eigen::Index> free{start};

  for (int outer = 0; outer < 10 * static_cast<int>(m) + 50; ++outer) {
    const Eigen::VectorXd grad = gram * w - zty;
    double level = 0.0;
    for (Eigen::Index i : free) level += grad[i];
    level /= static_cast<double>(free.size());
    Eigen::Index enter = -1;
    double most_negative = -tol;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (std::find(free.begin(), free.end(), j) != free.end()) continue;
      if (grad[j] - level < most_negative) {
        most_negative = grad[j] - level;
        enter = j;
      }
    }
    if (enter < 0) break;
    std::vector<Eigen::Index> trial = free;
    trial.push_back(enter);
    std::sort(trial.begin(), trial.end());

    for (int inner = 0; inner <= static_cast<int>(m); ++inner) {
      const Eigen::VectorXd sol = affine_ls(gram, zty, trial);
      bool interior = true;
      for (Eigen::Index a = 0; a < sol.size(); ++a)
        if (sol[a] <= 0.0) interior = false;
      if (interior) {
        w.setZero();
        for (std::size_t a = 0; a < trial.size(); ++a) w[trial[a]] = sol[static_cast<Eigen::Index>(a)];
        free = trial;
        break;
      }
      double alpha = 1.0;
      for (std::size_t a = 0; a < trial.size(); ++a) {
        const double s = sol[static_cast<Eigen::Index>(a)];
        const double cur = w[trial[a]];
        if (s <= 0.0 && cur - s > 0.0) alpha = std::min(alpha, cur / (cur - s));
      }
      for (std::size_t a = 0; a < trial.size(); ++a) {
        const Eigen::Index i = trial[a];
        w[i] += alpha * (sol[static_cast<Eigen::Index>(a)] - w[i]);
      }
      std::vector<Eigen::Index> kept;
      for (Eigen::Index i : trial)
        if (w[i] > 1e-15) kept.push_back(i);
        else w[i] = 0.0;
      if (kept.empty()) break;
      trial = kept;
      free = kept;
    }
  }
  w = w.cwiseMax(0.0);
  return w / w.sum();
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

// Projected gradient with backtracking for the log-loss meta problem.
Eigen::VectorXd simplex_logloss(const Eigen::MatrixXd& z, const Eigen::VectorXd& y) {
  const Eigen::Index m = z.cols();
  const double n = static_cast<double>(z.rows());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  w[best_vertex(z, y, Loss::logloss)] = 1.0;
  double value = objective(z, y, w, Loss::logloss);
  double step = 1.0;
  for (int iter = 0; iter < 2000; ++iter) {
    const Eigen::ArrayXd p = (z * w).array().max(kLogLossClip).min(1.0 - kLogLossClip);
    const Eigen::VectorXd resid = ((p - y.array()) / (p * (1.0 - p))).matrix();
    const Eigen::VectorXd grad = z.transpose() * resid / n;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Eigen::VectorXd cand = project_simplex(w - step * grad);
      const double cand_value = objective(z, y, cand, Loss::logloss);
      if (cand_value <= value - 1e-4 * std::max(0.0, grad.dot(w - cand))) {
        moved = (cand - w).lpNorm<Eigen::Infinity>() > 1e-8;
        if (cand_value < value) {
          w = cand;
          value = cand_value;
        }
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    step = std::min(1.0, step * 2.0);
  }
  return w / w.sum();
}

}  // namespace

SLLibrary SLLibrary::from_specs(std::vector<LearnerSpec> specs) {
  SLLibrary lib;
  std::map<std::string, int> uses;
  for (const auto& s : specs) {
    const std::string base = s.to_string();
    const int k = ++uses[base];
    lib.names.push_back(k == 1 ? base : base + "#" + std::to_string(k));
  }
  lib.candidates = std::move(specs);
  return lib;
}

void SLLibrary::validate() const {
  if (candidates.empty()) throw InvalidArgument("superlearner", "library is empty");
  if (names.size() != candidates.size())
    throw InvalidArgument("superlearner", "library names and candidates differ in length");
  std::set<std::string> seen;
  for (const auto& name : names)
    if (!seen.insert(name).second) throw InvalidArgument("superlearner", "duplicate candidate name '" + name + "'");
}

SLLibrary default_library(Eigen::Index d, TargetKind kind) {
  SLLibrary lib;
  const LearnerFamily base = kind == TargetKind::probability ? LearnerFamily::logistic : LearnerFamily::ols;
  const std::string base_name = kind == TargetKind::probability ? "logistic" : "ols";
  LearnerSpec plain = LearnerSpec::defaults(base);
  LearnerSpec inter = plain;
  inter.interactions = true;
  lib.candidates = {plain, inter};
  lib.names = {base_name, base_name + "_interactions"};

  for (int mtry : {5, 8}) {
    for (int trees : {500, 2000}) {
      LearnerSpec f = LearnerSpec::defaults(LearnerFamily::forest);
      f.n_trees = trees;
      f.mtry = static_cast<int>(std::min<Eigen::Index>(mtry, std::max<Eigen::Index>(d, 1)));
      lib.candidates.push_back(f);
      lib.names.push_back("forest_" + std::to_string(trees) + "_mtry" + std::to_string(mtry));
    }
  }
  for (int trees : {100, 1000})
    for (double nu : {0.001, 0.1})
      for (int depth : {1, 4}) {
        lib.candidates.push_back(boost_spec(trees, nu, depth));
        lib.names.push_back("boost_" + std::to_string(trees) + "_" + format_number(nu) + "_depth" +
                            std::to_string(depth));
      }
  lib.candidates.push_back(boost_spec(100, 0.1, 3));
  lib.names.push_back("boost_depth3");
  return lib;
}

SLLibrary fast_library(TargetKind kind) {
  SLLibrary lib;
  const bool prob = kind == TargetKind::probability;
  LearnerSpec forest = LearnerSpec::defaults(LearnerFamily::forest);
  forest.n_trees = 100;
  lib.candidates = {LearnerSpec::defaults(LearnerFamily::mean),
                    LearnerSpec::defaults(prob ? LearnerFamily::logistic : LearnerFamily::ols),
                    LearnerSpec::defaults(LearnerFamily::lasso), boost_spec(100, 0.1, 2), forest};
  lib.names = {"mean", prob ? "logistic" : "ols", "lasso", "boost", "forest"};
  return lib;
}

Eigen::MatrixXd level_one(const SLLibrary& library, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const FoldAssignment& folds, TargetKind kind) {
  library.validate();
  if (folds.size() != x.rows() || y.size() != x.rows())
    throw InvalidArgument("superlearner", "level_one: folds/target do not match feature rows");
  const std::size_t m = library.size();
  const std::size_t v = static_cast<std::size_t>(folds.folds);
  Eigen::MatrixXd z(x.rows(), static_cast<Eigen::Index>(m));
  parallel_for(m * v, [&](std::size_t task) {
    const std::size_t k = task / v;
    const int fold = static_cast<int>(task % v);
    const auto train = folds.training_rows(fold);
    const auto test = folds.holdout_rows(fold);
    ModelPtr model;
    try {
      model = fit_learner(library.candidates[k], take_rows(x, train), take(y, train), kind);
    } catch (const Error& e) {
      throw FitError("superlearner", "candidate '" + library.names[k] + "' failed on fold " +
                                         std::to_string(fold + 1) + ": " + e.what());
    }
    const Eigen::VectorXd pred = model->predict(take_rows(x, test));
    for (std::size_t r = 0; r < test.size(); ++r) z(test[r], static_cast<Eigen::Index>(k)) = pred[static_cast<Eigen::Index>(r)];
  });
  return z;
}

MetaWeights meta_weights(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, Loss loss) {
  if (z.cols() < 1) throw InvalidArgument("superlearner", "meta_weights: no candidates");
  if (z.rows() != y.size()) throw InvalidArgument("superlearner", "meta_weights: length mismatch");
  MetaWeights out;
  if (z.cols() == 1) {
    out.weights = Eigen::VectorXd::Ones(1);
    return out;
  }
  if (z.allFinite() && y.allFinite()) {
    out.weights = loss == Loss::mse ? simplex_least_squares(z, y) : simplex_logloss(z, y);
  }
  if (out.weights.size() != z.cols() || !out.weights.allFinite() || !(out.weights.sum() > 0.0)) {
    out.weights = Eigen::VectorXd::Constant(z.cols(), 1.0 / static_cast<double>(z.cols()));
    out.fallback = true;
  }
  return out;
}

SLModel::SLModel(SLLibrary library, Eigen::VectorXd weights, std::vector<ModelPtr> models, FoldAssignment folds,
                 Eigen::VectorXd level_one_risk, TargetKind kind, FitInfo info)
    : FittedModel(kind, std::move(info)),
      library_(std::move(library)),
      weights_(std::move(weights)),
      models_(std::move(models)),
      folds_(std::move(folds)),
      level_one_risk_(std::move(level_one_risk)) {}

Eigen::VectorXd SLModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
  for (std::size_t k = 0; k < models_.size(); ++k) {
    const double w = weights_[static_cast<Eigen::Index>(k)];
    if (w == 0.0) continue;
    out += w * models_[k]->predict(x);
  }
  if (target_kind() == TargetKind::probability) out = out.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

SLModelPtr fit_super_learner(const SLLibrary& library, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             int folds, std::uint64_t seed, Loss loss, TargetKind kind) {
  library.validate();
  const FoldAssignment assignment = folds_for(y, folds, seed, kind);
  const Eigen::MatrixXd z = level_one(library, x, y, assignment, kind);
  MetaWeights mw = meta_weights(z, y, loss);

  Eigen::VectorXd risk(z.cols());
  for (Eigen::Index k = 0; k < z.cols(); ++k) {
    const Eigen::VectorXd col = z.col(k);
    risk[k] = evaluate_loss(loss, col, y);
  }

  std::vector<ModelPtr> models(library.size());
  parallel_for(library.size(), [&](std::size_t k) {
    if (mw.weights[static_cast<Eigen::Index>(k)] == 0.0) return;
    try {
      models[k] = fit_learner(library.candidates[k], x, y, kind);
    } catch (const Error& e) {
      throw FitError("superlearner", "candidate '" + library.names[k] + "' failed on the full sample: " + e.what());
    }
  });

  FitInfo info{LearnerSpec::defaults(LearnerFamily::mean), x.rows(), x.cols(), {}};
  if (mw.fallback) info.warnings.push_back("super learner: meta solver failed, using uniform weights");
  for (std::size_t k = 0; k < models.size(); ++k)
    if (models[k])
      for (const auto& w : models[k]->info().warnings) info.warnings.push_back(library.names[k] + ": " + w);
  return std::make_shared<SLModel>(library, std::move(mw.weights), std::move(models), assignment, std::move(risk),
                                   kind, std::move(info));
}

SLWeightTable weight_table(const SLModel& model, std::string role) {
  SLWeightTable t;
  t.role = std::move(role);
  t.names = model.library().names;
  t.weights.assign(model.weights().data(), model.weights().data() + model.weights().size());
  t.cv_risk.assign(model.level_one_risk().data(), model.level_one_risk().data() + model.level_one_risk().size());
  return t;
}

std::size_t discrete_sl(const std::vector<double>& risks) {
  if (risks.empty()) throw InvalidArgument("superlearner", "discrete_sl: empty risk vector");
  std::size_t best = 0;
  for (std::size_t k = 1; k < risks.size(); ++k)
    if (risks[k] < risks[best]) best = k;
  return best;
}

std::size_t discrete_sl(const SLRiskReport& report) { return discrete_sl(report.candidate_risk); }

SLRiskReport sl_risk_report(const SLLibrary& library, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            int outer_folds, int inner_folds, std::uint64_t seed, Loss loss, TargetKind kind) {
  library.validate();
  if (outer_folds < 2 || inner_folds < 2)
    throw InvalidArgument("superlearner", "sl_risk_report: fold counts must be at least 2");
  const FoldAssignment outer = folds_for(y, outer_folds, seed, kind);
  const std::size_t m = library.size();

  std::vector<std::vector<double>> cand(static_cast<std::size_t>(outer_folds), std::vector<double>(m));
  std::vector<double> discrete(static_cast<std::size_t>(outer_folds)), convex(static_cast<std::size_t>(outer_folds));

  for (int f = 0; f < outer_folds; ++f) {
    const auto train = outer.training_rows(f);
    const auto test = outer.holdout_rows(f);
    const Eigen::MatrixXd xtr = take_rows(x, train);
    const Eigen::VectorXd ytr = take(y, train);
    const Eigen::MatrixXd xte = take_rows(x, test);
    const Eigen::VectorXd yte = take(y, test);

    const std::uint64_t inner_seed = mix64(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(f + 1)));
    const FoldAssignment inner = folds_for(ytr, inner_folds, inner_seed, kind);
    const Eigen::MatrixXd z = level_one(library, xtr, ytr, inner, kind);
    const MetaWeights mw = meta_weights(z, ytr, loss);
    std::vector<double> inner_risk(m);
    for (std::size_t k = 0; k < m; ++k) {
      const Eigen::VectorXd col = z.col(static_cast<Eigen::Index>(k));
      inner_risk[k] = evaluate_loss(loss, col, ytr);
    }
    const std::size_t pick = discrete_sl(inner_risk);

    std::vector<Eigen::VectorXd> preds(m);
    parallel_for(m, [&](std::size_t k) {
      try {
        preds[k] = fit_learner(library.candidates[k], xtr, ytr, kind)->predict(xte);
      } catch (const Error& e) {
        throw FitError("superlearner", "candidate '" + library.names[k] + "' failed on outer fold " +
                                           std::to_string(f + 1) + ": " + e.what());
      }
    });
    Eigen::VectorXd combined = Eigen::VectorXd::Zero(xte.rows());
    for (std::size_t k = 0; k < m; ++k) {
      cand[static_cast<std::size_t>(f)][k] = evaluate_loss(loss, preds[k], yte);
      combined += mw.weights[static_cast<Eigen::Index>(k)] * preds[k];
    }
    if (kind == TargetKind::probability) combined = combined.cwiseMax(0.0).cwiseMin(1.0);
    discrete[static_cast<std::size_t>(f)] = cand[static_cast<std::size_t>(f)][pick];
    convex[static_cast<std::size_t>(f)] = evaluate_loss(loss, combined, yte);
  }

  SLRiskReport report;
  report.names = library.names;
  report.candidate_risk.assign(m, 0.0);
  const double v = static_cast<double>(outer_folds);
  for (int f = 0; f < outer_folds; ++f) {
    for (std::size_t k = 0; k < m; ++k) report.candidate_risk[k] += cand[static_cast<std::size_t>(f)][k] / v;
    report.discrete_risk += discrete[static_cast<std::size_t>(f)] / v;
    report.super_risk += convex[static_cast<std::size_t>(f)] / v;
  }
  return report;
}

std::string SLRiskReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "name,cv_risk\n";
  for (std::size_t k = 0; k < names.size(); ++k) os << names[k] << ',' << candidate_risk[k] << '\n';
  os << "discrete_sl," << discrete_risk << '\n';
  os << "super_learner," << super_risk << '\n';
  return os.str();
}

}  // namespace ateml
