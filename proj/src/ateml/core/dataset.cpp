#include "ateml/core/dataset.hpp"

#include "ateml/core/error.hpp"

#include <cmath>
#include <string>

namespace ateml {

Dataset::Dataset(Eigen::MatrixXd covariates, std::vector<std::string> names,
                 Eigen::VectorXd treatment, Eigen::VectorXd outcome)
    : Dataset(std::move(covariates), std::move(names), std::move(treatment),
              std::move(outcome), OutcomeKind::binary, 0.0, 1.0) {}

Dataset::Dataset(Eigen::MatrixXd covariates, std::vector<std::string> names,
                 Eigen::VectorXd treatment, Eigen::VectorXd outcome, OutcomeKind kind,
                 double lo, double hi)
    : covariates_(std::move(covariates)),
      names_(std::move(names)),
      treatment_(std::move(treatment)),
      outcome_(std::move(outcome)),
      kind_(kind),
      lo_(kind == OutcomeKind::binary ? 0.0 : lo),
      hi_(kind == OutcomeKind::binary ? 1.0 : hi) {
  if (names_.empty()) names_ = default_names(covariates_.cols());
  validate();
}

Dataset Dataset::with_observed_bounds(Eigen::MatrixXd covariates,
                                      std::vector<std::string> names,
                                      Eigen::VectorXd treatment,
                                      Eigen::VectorXd outcome) {
  if (outcome.size() == 0) throw InvalidArgument("core", "dataset: empty outcome");
  const double lo = outcome.minCoeff();
  double hi = outcome.maxCoeff();
  if (!(hi > lo)) hi = lo + 1.0;
  return Dataset(std::move(covariates), std::move(names), std::move(treatment),
                 std::move(outcome), OutcomeKind::bounded_continuous, lo, hi);
}

void Dataset::validate() {
  const Index n = covariates_.rows();
  if (n < 2) throw InvalidArgument("core", "dataset: need at least 2 rows");
  if (covariates_.cols() < 1) throw InvalidArgument("core", "dataset: need at least 1 covariate");
  if (treatment_.size() != n || outcome_.size() != n)
    throw InvalidArgument("core", "dataset: treatment/outcome length differs from covariate rows");
  if (static_cast<Index>(names_.size()) != covariates_.cols())
    throw InvalidArgument("core", "dataset: covariate name count differs from column count");
  if (!covariates_.allFinite()) throw InvalidArgument("core", "dataset: non-finite covariate entry");
  if (!outcome_.allFinite()) throw InvalidArgument("core", "dataset: non-finite outcome entry");

  n_treated_ = 0;
  for (Index i = 0; i < n; ++i) {
    const double a = treatment_[i];
    if (a != 0.0 && a != 1.0)
      throw InvalidArgument("core", "dataset: treatment must be 0 or 1 (row " + std::to_string(i) + ")");
    if (a == 1.0) ++n_treated_;
  }
  if (n_treated_ == 0 || n_treated_ == n)
    throw InvalidArgument("core", "dataset: both treatment arms must be present");

  if (kind_ == OutcomeKind::binary) {
    for (Index i = 0; i < n; ++i)
      if (outcome_[i] != 0.0 && outcome_[i] != 1.0)
        throw InvalidArgument("core", "dataset: binary outcome must be 0 or 1");
  } else {
    if (!(std::isfinite(lo_) && std::isfinite(hi_) && lo_ < hi_))
      throw InvalidArgument("core", "dataset: outcome bounds require lo < hi");
    if (outcome_.minCoeff() < lo_ || outcome_.maxCoeff() > hi_)
      throw InvalidArgument("core", "dataset: outcome outside declared bounds");
  }
}

Dataset Dataset::subset_rows(std::span<const Index> rows) const {
  return Dataset(take_rows(covariates_, rows), names_, take(treatment_, rows),
                 take(outcome_, rows), kind_, lo_, hi_);
}

Dataset Dataset::select_columns(std::span<const Index> columns) const {
  std::vector<std::string> picked;
  picked.reserve(columns.size());
  for (Index c : columns) {
    if (c < 0 || c >= cols()) throw InvalidArgument("core", "dataset: column index out of range");
    picked.push_back(names_[static_cast<std::size_t>(c)]);
  }
  return Dataset(take_cols(covariates_, columns), std::move(picked), treatment_, outcome_,
                 kind_, lo_, hi_);
}

Dataset Dataset::with_outcome(Eigen::VectorXd outcome, OutcomeKind kind, double lo,
                              double hi) const {
  return Dataset(covariates_, names_, treatment_, std::move(outcome), kind, lo, hi);
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& matrix, std::span<const Index> rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), matrix.cols());
  for (Index j = 0; j < matrix.cols(); ++j)
    for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Index>(r), j) = matrix(rows[r], j);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& vector, std::span<const Index> rows) {
  Eigen::VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out[static_cast<Index>(r)] = vector[rows[r]];
  return out;
}

Eigen::MatrixXd take_cols(const Eigen::MatrixXd& matrix, std::span<const Index> cols) {
  Eigen::MatrixXd out(matrix.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = matrix.col(cols[c]);
  return out;
}

std::vector<std::string> default_names(Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

}  // namespace ateml
