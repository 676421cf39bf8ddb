#include "ateml/core/folds.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/rng.hpp"

#include <string>

namespace ateml {

std::vector<Index> FoldAssignment::holdout_rows(int fold) const {
  std::vector<Index> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) rows.push_back(static_cast<Index>(i));
  return rows;
}

std::vector<Index> FoldAssignment::training_rows(int fold) const {
  std::vector<Index> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) rows.push_back(static_cast<Index>(i));
  return rows;
}

std::vector<Index> FoldAssignment::fold_sizes() const {
  std::vector<Index> sizes(static_cast<std::size_t>(folds), 0);
  for (int f : fold_of) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

FoldAssignment make_folds(Index n, int folds, std::uint64_t seed) {
  if (folds < 2 || folds > n)
    throw InvalidArgument("core", "make_folds: need 2 <= V <= n (V=" + std::to_string(folds) +
                                      ", n=" + std::to_string(n) + ")");
  Rng rng(seed, 0x666f6c64);
  const auto perm = rng.permutation(static_cast<std::size_t>(n));
  FoldAssignment out;
  out.folds = folds;
  out.seed = seed;
  out.fold_of.assign(static_cast<std::size_t>(n), 0);
  const Index base = n / folds;
  const Index extra = n % folds;
  std::size_t pos = 0;
  for (int f = 0; f < folds; ++f) {
    const Index block = base + (f < extra ? 1 : 0);
    for (Index k = 0; k < block; ++k) out.fold_of[perm[pos++]] = f;
  }
  return out;
}

FoldAssignment make_stratified_folds(const Eigen::VectorXd& strata, int folds,
                                     std::uint64_t seed) {
  const Index n = strata.size();
  if (folds < 2 || folds > n)
    throw InvalidArgument("core", "make_stratified_folds: need 2 <= V <= n (V=" +
                                      std::to_string(folds) + ", n=" + std::to_string(n) + ")");
  std::vector<std::size_t> arm1, arm0;
  for (Index i = 0; i < n; ++i) (strata[i] == 1.0 ? arm1 : arm0).push_back(static_cast<std::size_t>(i));

  Rng rng(seed, 0x7374726174);
  auto p1 = rng.permutation(arm1.size());
  auto p0 = rng.permutation(arm0.size());

  FoldAssignment out;
  out.folds = folds;
  out.seed = seed;
  out.fold_of.assign(static_cast<std::size_t>(n), 0);
  std::size_t pos = 0;
  for (std::size_t k : p1) out.fold_of[arm1[k]] = static_cast<int>(pos++ % folds);
  for (std::size_t k : p0) out.fold_of[arm0[k]] = static_cast<int>(pos++ % folds);
  return out;
}

}  // namespace ateml
