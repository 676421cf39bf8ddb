#include "ateml/learners/tree.hpp"

#include "ateml/core/error.hpp"

#include <algorithm>
#include <numeric>

namespace ateml {

Eigen::VectorXd RegressionTree::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict_row(x, i);
  return out;
}

int RegressionTree::leaf_of(const Eigen::MatrixXd& x, Eigen::Index row) const {
  if (nodes_.empty()) throw InvalidArgument("learners", "tree: empty model");
  int node = 0;
  while (!nodes_[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode& n = nodes_[static_cast<std::size_t>(node)];
    node = x(row, n.feature) <= n.threshold ? n.left : n.right;
  }
  return node;
}

double RegressionTree::predict_row(const Eigen::MatrixXd& x, Eigen::Index row) const {
  return nodes_[static_cast<std::size_t>(leaf_of(x, row))].value;
}

int RegressionTree::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

int RegressionTree::leaf_count() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const TreeNode& n) { return n.is_leaf(); }));
}

TreeGrower::TreeGrower(const Eigen::MatrixXd& x) : x_(x), order_(static_cast<std::size_t>(x.cols())) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    auto& ord = order_[static_cast<std::size_t>(j)];
    ord.resize(static_cast<std::size_t>(x.rows()));
    std::iota(ord.begin(), ord.end(), Eigen::Index{0});
    std::stable_sort(ord.begin(), ord.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return x(a, j) < x(b, j); });
  }
}

namespace {

struct Segment {
  std::size_t begin;
  std::size_t end;
  int node;
  int depth;
};

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

}  // namespace

RegressionTree TreeGrower::grow(const Eigen::VectorXd& target, const std::vector<int>& multiplicity,
                                const TreeParams& params, Rng* rng,
                                const Eigen::VectorXd* hessian) const {
  const Eigen::Index n = x_.rows();
  const auto d = static_cast<std::size_t>(x_.cols());
  if (target.size() != n) throw InvalidArgument("learners", "tree: target length mismatch");
  if (params.min_leaf < 1 || params.max_depth < 0) throw InvalidArgument("learners", "tree: bad parameters");
  if (!multiplicity.empty() && multiplicity.size() != static_cast<std::size_t>(n))
    throw InvalidArgument("learners", "tree: multiplicity length mismatch");

  // Per-feature sorted sample lists; every node owns the same [begin, end)
  // range in each list.
  std::vector<std::vector<Eigen::Index>> lists(d);
  for (std::size_t j = 0; j < d; ++j) {
    auto& list = lists[j];
    if (multiplicity.empty()) {
      list = order_[j];
    } else {
      for (Eigen::Index row : order_[j])
        for (int c = 0; c < multiplicity[static_cast<std::size_t>(row)]; ++c) list.push_back(row);
    }
  }
  const std::size_t m = d > 0 ? lists[0].size() : 0;
  if (m == 0) throw InvalidArgument("learners", "tree: no training samples");

  const bool all_features = params.mtry <= 0 || static_cast<std::size_t>(params.mtry) >= d;
  std::vector<std::size_t> feature_pool(d);
  std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
  std::vector<char> goes_left(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> buffer;

  std::vector<TreeNode> nodes;
  nodes.push_back(TreeNode{});
  std::vector<Segment> stack{{0, m, 0, 0}};

  while (!stack.empty()) {
    const Segment seg = stack.back();
    stack.pop_back();
    const auto& base = lists[0];
    double sum = 0.0, sum_sq = 0.0, hess_sum = 0.0;
    for (std::size_t k = seg.begin; k < seg.end; ++k) {
      const double t = target[base[k]];
      sum += t;
      sum_sq += t * t;
      if (hessian) hess_sum += (*hessian)[base[k]];
    }
    const auto count = static_cast<double>(seg.end - seg.begin);
    TreeNode& node = nodes[static_cast<std::size_t>(seg.node)];
    node.depth = seg.depth;
    node.weight = count;
    node.value = hessian ? sum / std::max(hess_sum, 1e-6) : sum / count;

    const bool depth_ok = params.max_depth == 0 || seg.depth < params.max_depth;
    if (!depth_ok || seg.end - seg.begin < 2 * static_cast<std::size_t>(params.min_leaf)) continue;

    std::vector<std::size_t> candidates;
    if (all_features) {
      candidates = feature_pool;
    } else {
      std::vector<std::size_t> pool = feature_pool;
      for (int k = 0; k < params.mtry; ++k) {
        const std::size_t pick = static_cast<std::size_t>(k) + rng->below(d - static_cast<std::size_t>(k));
        std::swap(pool[static_cast<std::size_t>(k)], pool[pick]);
      }
      candidates.assign(pool.begin(), pool.begin() + params.mtry);
      std::sort(candidates.begin(), candidates.end());
    }

    const double parent_score = sum * sum / count;
    const double min_gain = 1e-12 * std::max(sum_sq, 1e-300);
    SplitChoice best;
    const auto min_leaf = static_cast<std::size_t>(params.min_leaf);
    for (std::size_t j : candidates) {
      const auto& list = lists[j];
      double left_sum = 0.0;
      for (std::size_t k = seg.begin; k + 1 < seg.end; ++k) {
        left_sum += target[list[k]];
        const std::size_t n_left = k + 1 - seg.begin;
        const std::size_t n_right = seg.end - k - 1;
        if (n_left < min_leaf) continue;
        if (n_right < min_leaf) break;
        const double xv = x_(list[k], static_cast<Eigen::Index>(j));
        const double xn = x_(list[k + 1], static_cast<Eigen::Index>(j));
        if (!(xv < xn)) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                            right_sum * right_sum / static_cast<double>(n_right) - parent_score;
        if (gain > min_gain && gain > best.gain) {
          double mid = 0.5 * (xv + xn);
          if (!(mid < xn)) mid = xv;
          best = {static_cast<int>(j), mid, gain};
        }
      }
    }
    if (best.feature < 0) continue;

    // Partition every feature list stably around the chosen split.
    const auto bf = static_cast<Eigen::Index>(best.feature);
    for (std::size_t k = seg.begin; k < seg.end; ++k) {
      const Eigen::Index row = base[k];
      goes_left[static_cast<std::size_t>(row)] = x_(row, bf) <= best.threshold ? 1 : 0;
    }
    std::size_t n_left = 0;
    for (std::size_t j = 0; j < d; ++j) {
      auto& list = lists[j];
      buffer.clear();
      std::size_t write = seg.begin;
      for (std::size_t k = seg.begin; k < seg.end; ++k) {
        if (goes_left[static_cast<std::size_t>(list[k])]) list[write++] = list[k];
        else buffer.push_back(list[k]);
      }
      n_left = write - seg.begin;
      std::copy(buffer.begin(), buffer.end(), list.begin() + static_cast<std::ptrdiff_t>(write));
    }

    const int left_id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{});
    const int right_id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{});
    TreeNode& parent = nodes[static_cast<std::size_t>(seg.node)];
    parent.feature = best.feature;
    parent.threshold = best.threshold;
    parent.left = left_id;
    parent.right = right_id;
    stack.push_back({seg.begin + n_left, seg.end, right_id, seg.depth + 1});
    stack.push_back({seg.begin, seg.begin + n_left, left_id, seg.depth + 1});
  }
  return RegressionTree(std::move(nodes));
}

RegressionTree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int max_depth, int min_leaf) {
  if (max_depth < 1 || min_leaf < 1) throw InvalidArgument("learners", "fit_tree: need max_depth >= 1 and min_leaf >= 1");
  if (y.size() != x.rows() || x.rows() < 1) throw InvalidArgument("learners", "fit_tree: target length mismatch");
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("learners", "fit_tree: non-finite input");
  const TreeGrower grower(x);
  return grower.grow(y, {}, TreeParams{max_depth, min_leaf, 0});
}

}  // namespace ateml
