#include "ateml/learners/forest.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/parallel.hpp"

#include <cmath>

namespace ateml {

int default_mtry(Eigen::Index d) {
  return std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(d)))));
}

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& x) const {
  if (trees.empty()) throw InvalidArgument("learners", "forest: empty model");
  Eigen::VectorXd total = Eigen::VectorXd::Zero(x.rows());
  for (const auto& tree : trees) total += tree.predict(x);
  return total / static_cast<double>(trees.size());
}

ForestModel fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params) {
  if (y.size() != x.rows() || x.rows() < 1) throw InvalidArgument("learners", "fit_forest: target length mismatch");
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("learners", "fit_forest: non-finite input");
  if (params.n_trees < 1) throw InvalidArgument("learners", "fit_forest: n_trees must be >= 1");
  const int mtry = params.mtry == 0 ? default_mtry(x.cols()) : params.mtry;
  if (mtry < 1 || mtry > x.cols()) throw InvalidArgument("learners", "fit_forest: mtry must lie in 1..d");
  if (params.min_leaf < 1 || params.max_depth < 0) throw InvalidArgument("learners", "fit_forest: bad tree limits");

  const TreeGrower grower(x);
  const Rng root(params.seed, 0x666f72657374);
  ForestModel model;
  model.mtry = mtry;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));
  model.tree_seeds.resize(static_cast<std::size_t>(params.n_trees));
  const TreeParams tp{params.max_depth, params.min_leaf, mtry};
  const auto n = static_cast<std::size_t>(x.rows());

  parallel_for(model.trees.size(), [&](std::size_t t) {
    Rng rng = root.split(t);
    model.tree_seeds[t] = rng.key();
    std::vector<int> counts;
    if (params.bootstrap) {
      counts.assign(n, 0);
      for (std::size_t k = 0; k < n; ++k) ++counts[rng.below(n)];
    }
    model.trees[t] = grower.grow(y, counts, tp, &rng);
  });
  return model;
}

}  // namespace ateml
