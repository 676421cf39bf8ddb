#pragma once

#include "ateml/core/folds.hpp"
#include "ateml/core/loss.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ateml {

enum class LearnerFamily { mean, ols, logistic, lasso, tree, forest, boost };
enum class TargetKind { regression, probability };

// Declarative learner configuration. Only the fields relevant to `family`
// are meaningful; the rest stay at their defaults so that specs compare and
// round-trip through to_string()/parse_learner_spec() exactly.
struct LearnerSpec {
  LearnerFamily family = LearnerFamily::ols;

  bool interactions = false;        // ols, logistic, lasso
  double ridge = 0.0;               // logistic
  std::optional<double> lambda;     // lasso; unset = choose by cross-validation
  int max_depth = 0;                // tree, forest (0 = unlimited), boost
  int min_leaf = 1;                 // tree, forest, boost
  int n_trees = 0;                  // forest, boost
  int mtry = 0;                     // forest (0 = round(sqrt(d)))
  double shrinkage = 1.0;           // boost
  std::uint64_t seed = 0;           // forest, lasso cv
  bool bootstrap = true;            // forest

  static LearnerSpec defaults(LearnerFamily family);
  void validate(Eigen::Index d) const;
  std::string to_string() const;
  bool operator==(const LearnerSpec&) const = default;
};

LearnerSpec parse_learner_spec(std::string_view text);
std::string_view to_string(LearnerFamily family) noexcept;
std::string_view to_string(TargetKind kind) noexcept;

struct FitInfo {
  LearnerSpec spec;
  Eigen::Index n = 0;
  Eigen::Index d = 0;
  std::vector<std::string> warnings;
};

// Trained predictor. Immutable and safe to share between threads.
class FittedModel {
 public:
  FittedModel(TargetKind kind, FitInfo info) : kind_(kind), info_(std::move(info)) {}
  virtual ~FittedModel() = default;

  virtual Eigen::VectorXd predict(const Eigen::MatrixXd& x) const = 0;

  TargetKind target_kind() const noexcept { return kind_; }
  const FitInfo& info() const noexcept { return info_; }

 private:
  TargetKind kind_;
  FitInfo info_;
};

using ModelPtr = std::shared_ptr<const FittedModel>;

// Implemented by the learners module.
ModelPtr fit_learner(const LearnerSpec& spec, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& y, TargetKind kind);

// Mean over folds of the held-out loss of `spec` trained on the other folds.
double cv_risk(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               const FoldAssignment& folds, Loss loss,
               TargetKind kind = TargetKind::regression);

}  // namespace ateml
