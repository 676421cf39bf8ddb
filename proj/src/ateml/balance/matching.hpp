#pragma once

#include "ateml/balance/balance.hpp"

#include <vector>

namespace ateml {

struct MatchResult {
  std::vector<Index> match;  // nearest opposite-arm unit for each row
  std::vector<int> usage;    // times each row served as someone's match

  // Frequency weights of the matched sample: each unit once plus its reuse.
  Eigen::VectorXd frequency_weights() const;
};

// 1:1 nearest-neighbour matching on the propensity score, with replacement,
// no caliper. Ties go to the lowest index.
MatchResult ps_match(const Eigen::VectorXd& ps, const Eigen::VectorXd& a);

BalanceAdjustment adjustment(std::string label, const WeightVector& weights);
BalanceAdjustment adjustment(std::string label, const MatchResult& match);

}  // namespace ateml
