#pragma once

#include "ateml/core/dataset.hpp"

#include <cstdint>
#include <vector>

namespace ateml {

// Partition of rows 0..n-1 into V folds (fold ids are 0-based).
struct FoldAssignment {
  std::vector<int> fold_of;
  int folds = 0;
  std::uint64_t seed = 0;

  Index size() const noexcept { return static_cast<Index>(fold_of.size()); }
  std::vector<Index> holdout_rows(int fold) const;
  std::vector<Index> training_rows(int fold) const;
  std::vector<Index> fold_sizes() const;
};

// Uniform random permutation, then contiguous blocks. Deterministic in
// (n, V, seed).
FoldAssignment make_folds(Index n, int folds, std::uint64_t seed);

// Each arm of `strata` (a 0/1 vector) is permuted separately and dealt out
// round-robin, so both arms are spread over every fold when possible.
FoldAssignment make_stratified_folds(const Eigen::VectorXd& strata, int folds,
                                     std::uint64_t seed);

constexpr int kDefaultFolds = 10;

}  // namespace ateml
