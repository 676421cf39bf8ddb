// fit_learner: dispatch from a LearnerSpec to the concrete learners.

#include "ateml/core/error.hpp"
#include "ateml/core/learner.hpp"
#include "ateml/core/stats.hpp"
#include "ateml/learners/boost.hpp"
#include "ateml/learners/forest.hpp"
#include "ateml/learners/lasso.hpp"
#include "ateml/learners/linear.hpp"
#include "ateml/learners/logistic_lasso.hpp"
#include "ateml/learners/tree.hpp"

#include <algorithm>
#include <optional>

namespace ateml {
namespace {

Eigen::VectorXd clip_unit(Eigen::VectorXd v) { return v.cwiseMax(0.0).cwiseMin(1.0); }

class MeanModel final : public FittedModel {
 public:
  MeanModel(double value, TargetKind kind, FitInfo info) : FittedModel(kind, std::move(info)), value_(value) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    return Eigen::VectorXd::Constant(x.rows(), value_);
  }

 private:
  double value_;
};

// Optional pairwise expansion shared by the linear families.
class ExpandingModel : public FittedModel {
 public:
  ExpandingModel(std::optional<InteractionExpansion> expansion, TargetKind kind, FitInfo info)
      : FittedModel(kind, std::move(info)), expansion_(std::move(expansion)) {}

 protected:
  Eigen::MatrixXd features(const Eigen::MatrixXd& x) const {
    return expansion_ ? expansion_->apply(x) : x;
  }

 private:
  std::optional<InteractionExpansion> expansion_;
};

class LinearWrapper final : public ExpandingModel {
 public:
  LinearWrapper(LinearModel m, std::optional<InteractionExpansion> e, TargetKind kind, FitInfo info)
      : ExpandingModel(std::move(e), kind, std::move(info)), model_(std::move(m)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd p = model_.linear_predictor(features(x));
    return target_kind() == TargetKind::probability ? clip_unit(std::move(p)) : p;
  }

 private:
  LinearModel model_;
};

class LogisticWrapper final : public ExpandingModel {
 public:
  LogisticWrapper(LogisticFit fit, std::optional<InteractionExpansion> e, FitInfo info)
      : ExpandingModel(std::move(e), TargetKind::probability, std::move(info)), fit_(std::move(fit)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override { return fit_.predict_proba(features(x)); }

 private:
  LogisticFit fit_;
};

class LassoWrapper final : public ExpandingModel {
 public:
  LassoWrapper(LassoFit fit, std::optional<InteractionExpansion> e, TargetKind kind, FitInfo info)
      : ExpandingModel(std::move(e), kind, std::move(info)), fit_(std::move(fit)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd p = fit_.predict(features(x));
    return target_kind() == TargetKind::probability ? clip_unit(std::move(p)) : p;
  }

 private:
  LassoFit fit_;
};

class LogisticLassoWrapper final : public ExpandingModel {
 public:
  LogisticLassoWrapper(LogisticLassoFit fit, std::optional<InteractionExpansion> e, FitInfo info)
      : ExpandingModel(std::move(e), TargetKind::probability, std::move(info)), fit_(std::move(fit)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override { return fit_.predict_proba(features(x)); }

 private:
  LogisticLassoFit fit_;
};

class TreeWrapper final : public FittedModel {
 public:
  TreeWrapper(RegressionTree tree, TargetKind kind, FitInfo info)
      : FittedModel(kind, std::move(info)), tree_(std::move(tree)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override { return tree_.predict(x); }

 private:
  RegressionTree tree_;
};

class ForestWrapper final : public FittedModel {
 public:
  ForestWrapper(ForestModel forest, TargetKind kind, FitInfo info)
      : FittedModel(kind, std::move(info)), forest_(std::move(forest)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override { return forest_.predict(x); }

 private:
  ForestModel forest_;
};

class BoostWrapper final : public FittedModel {
 public:
  BoostWrapper(BoostModel boost, TargetKind kind, FitInfo info)
      : FittedModel(kind, std::move(info)), boost_(std::move(boost)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override { return boost_.predict(x); }

 private:
  BoostModel boost_;
};

void check_probability_target(const Eigen::VectorXd& y, const LearnerSpec& spec) {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 0.0 && y[i] != 1.0)
      throw InvalidArgument("learners", spec.to_string() + ": probability target must be 0/1");
}

int inner_folds(Eigen::Index n) { return static_cast<int>(std::min<Eigen::Index>(10, n)); }

}  // namespace

ModelPtr fit_learner(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     TargetKind kind) {
  if (x.rows() < 1 || y.size() != x.rows())
    throw InvalidArgument("learners", "fit_learner: target length mismatch");
  spec.validate(x.cols());
  if (kind == TargetKind::probability) check_probability_target(y, spec);

  FitInfo info{spec, x.rows(), x.cols(), {}};
  const bool prob = kind == TargetKind::probability;

  std::optional<InteractionExpansion> expansion;
  const bool expands = spec.interactions && (spec.family == LearnerFamily::ols ||
                                             spec.family == LearnerFamily::logistic ||
                                             spec.family == LearnerFamily::lasso);
  if (expands) expansion.emplace(x);
  const Eigen::MatrixXd& design = x;
  const Eigen::MatrixXd expanded = expands ? expansion->apply(x) : Eigen::MatrixXd();
  const Eigen::MatrixXd& features = expands ? expanded : design;

  switch (spec.family) {
    case LearnerFamily::mean:
      return std::make_shared<MeanModel>(y.mean(), kind, std::move(info));

    case LearnerFamily::ols:
      return std::make_shared<LinearWrapper>(fit_ols(features, y), std::move(expansion), kind, std::move(info));

    case LearnerFamily::logistic: {
      if (!prob) throw InvalidArgument("learners", "logistic learner needs a probability (0/1) target");
      LogisticFit fit = fit_logistic(features, y, spec.ridge);
      if (fit.separation_refit) info.warnings.push_back("logistic: separation detected, refit with ridge 1e-6");
      if (!fit.converged) info.warnings.push_back("logistic: IRLS did not converge in 100 iterations");
      return std::make_shared<LogisticWrapper>(std::move(fit), std::move(expansion), std::move(info));
    }

    case LearnerFamily::lasso: {
      if (prob) {
        LogisticLassoFit fit;
        if (spec.lambda) {
          fit = fit_logistic_lasso(features, y, *spec.lambda);
        } else {
          const auto folds = make_stratified_folds(y, inner_folds(x.rows()), spec.seed);
          fit = logistic_lasso_cv(features, y, {}, folds).fit;
        }
        return std::make_shared<LogisticLassoWrapper>(std::move(fit), std::move(expansion), std::move(info));
      }
      LassoFit fit;
      if (spec.lambda) {
        fit = fit_lasso(features, y, *spec.lambda);
      } else {
        const auto folds = make_folds(x.rows(), inner_folds(x.rows()), spec.seed);
        fit = lasso_cv(features, y, {}, folds).fit;
      }
      return std::make_shared<LassoWrapper>(std::move(fit), std::move(expansion), kind, std::move(info));
    }

    case LearnerFamily::tree:
      return std::make_shared<TreeWrapper>(fit_tree(x, y, spec.max_depth, spec.min_leaf), kind, std::move(info));

    case LearnerFamily::forest: {
      ForestParams params{spec.n_trees, spec.mtry, spec.min_leaf, spec.max_depth, spec.seed, spec.bootstrap};
      return std::make_shared<ForestWrapper>(fit_forest(x, y, params), kind, std::move(info));
    }

    case LearnerFamily::boost: {
      BoostParams params{spec.n_trees, spec.max_depth, spec.shrinkage, spec.min_leaf,
                         prob ? BoostLoss::bernoulli : BoostLoss::squared};
      return std::make_shared<BoostWrapper>(fit_boost(x, y, params), kind, std::move(info));
    }
  }
  throw InvalidArgument("learners", "fit_learner: unknown family");
}

}  // namespace ateml
