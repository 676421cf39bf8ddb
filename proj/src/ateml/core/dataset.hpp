#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ateml {

using Index = Eigen::Index;

enum class OutcomeKind { binary, bounded_continuous };

// Observed data O_i = (X_i, A_i, Y_i), complete cases only. Immutable once
// constructed; the constructor enforces every invariant.
class Dataset {
 public:
  // Binary outcome: bounds are fixed to [0, 1].
  Dataset(Eigen::MatrixXd covariates, std::vector<std::string> names,
          Eigen::VectorXd treatment, Eigen::VectorXd outcome);

  Dataset(Eigen::MatrixXd covariates, std::vector<std::string> names,
          Eigen::VectorXd treatment, Eigen::VectorXd outcome, OutcomeKind kind,
          double lo, double hi);

  // Bounded-continuous outcome with bounds taken from the observed range.
  static Dataset with_observed_bounds(Eigen::MatrixXd covariates,
                                      std::vector<std::string> names,
                                      Eigen::VectorXd treatment,
                                      Eigen::VectorXd outcome);

  Index rows() const noexcept { return covariates_.rows(); }
  Index cols() const noexcept { return covariates_.cols(); }

  const Eigen::MatrixXd& covariates() const noexcept { return covariates_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const Eigen::VectorXd& treatment() const noexcept { return treatment_; }
  const Eigen::VectorXd& outcome() const noexcept { return outcome_; }
  OutcomeKind outcome_kind() const noexcept { return kind_; }
  double outcome_lo() const noexcept { return lo_; }
  double outcome_hi() const noexcept { return hi_; }

  bool treated(Index i) const { return treatment_[i] == 1.0; }
  Index treated_count() const noexcept { return n_treated_; }
  Index control_count() const noexcept { return rows() - n_treated_; }

  // Rows may repeat (bootstrap resamples). Outcome bounds are preserved.
  Dataset subset_rows(std::span<const Index> rows) const;
  Dataset select_columns(std::span<const Index> columns) const;
  Dataset with_outcome(Eigen::VectorXd outcome, OutcomeKind kind, double lo,
                       double hi) const;

 private:
  void validate();

  Eigen::MatrixXd covariates_;
  std::vector<std::string> names_;
  Eigen::VectorXd treatment_;
  Eigen::VectorXd outcome_;
  OutcomeKind kind_ = OutcomeKind::binary;
  double lo_ = 0.0;
  double hi_ = 1.0;
  Index n_treated_ = 0;
};

// Rows of `matrix` picked by `rows`, in order.
Eigen::MatrixXd take_rows(const Eigen::MatrixXd& matrix, std::span<const Index> rows);
Eigen::VectorXd take(const Eigen::VectorXd& vector, std::span<const Index> rows);
Eigen::MatrixXd take_cols(const Eigen::MatrixXd& matrix, std::span<const Index> cols);

std::vector<std::string> default_names(Index d);

}  // namespace ateml
