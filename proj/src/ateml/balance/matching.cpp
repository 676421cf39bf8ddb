#include "ateml/balance/matching.hpp"

#include "ateml/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace ateml {

Eigen::VectorXd MatchResult::frequency_weights() const {
  Eigen::VectorXd w(static_cast<Index>(usage.size()));
  for (std::size_t i = 0; i < usage.size(); ++i) w[static_cast<Index>(i)] = 1.0 + usage[i];
  return w;
}

MatchResult ps_match(const Eigen::VectorXd& ps, const Eigen::VectorXd& a) {
  if (ps.size() != a.size()) throw InvalidArgument("balance", "ps_match: length mismatch");
  std::vector<Index> arm[2];
  for (Index i = 0; i < ps.size(); ++i) arm[a[i] == 1.0 ? 1 : 0].push_back(i);
  if (arm[0].empty() || arm[1].empty()) throw InvalidArgument("balance", "ps_match: both arms must be non-empty");
  for (auto& members : arm)
    std::sort(members.begin(), members.end(), [&](Index l, Index r) {
      return ps[l] < ps[r] || (ps[l] == ps[r] && l < r);
    });

  MatchResult out;
  out.match.assign(static_cast<std::size_t>(ps.size()), -1);
  out.usage.assign(static_cast<std::size_t>(ps.size()), 0);
  const auto first_at_or_above = [&](const std::vector<Index>& pool, double value) {
    return std::lower_bound(pool.begin(), pool.end(), value, [&](Index j, double v) { return ps[j] < v; });
  };

  for (Index i = 0; i < ps.size(); ++i) {
    const auto& pool = arm[a[i] == 1.0 ? 0 : 1];
    const double p = ps[i];
    Index best = -1;
    double best_dist = 0.0;
    const auto consider = [&](Index j) {
      const double dist = std::abs(p - ps[j]);
      if (best < 0 || dist < best_dist || (dist == best_dist && j < best)) {
        best = j;
        best_dist = dist;
      }
    };
    const auto above = first_at_or_above(pool, p);
    if (above != pool.end()) consider(*above);
    if (above != pool.begin()) consider(*first_at_or_above(pool, ps[*std::prev(above)]));
    out.match[static_cast<std::size_t>(i)] = best;
    ++out.usage[static_cast<std::size_t>(best)];
  }
  return out;
}

BalanceAdjustment adjustment(std::string label, const WeightVector& weights) {
  return {std::move(label), weights.w};
}

BalanceAdjustment adjustment(std::string label, const MatchResult& match) {
  return {std::move(label), match.frequency_weights()};
}

}  // namespace ateml
