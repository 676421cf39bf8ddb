#include "ateml/core/loss.hpp"

#include "ateml/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ateml {
namespace {

void check_lengths(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth, const char* what) {
  if (pred.size() != truth.size())
    throw InvalidArgument("core", std::string(what) + ": length mismatch");
  if (pred.size() == 0) throw InvalidArgument("core", std::string(what) + ": empty input");
}

}  // namespace

double loss_mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  check_lengths(pred, truth, "loss_mse");
  return (pred - truth).squaredNorm() / static_cast<double>(pred.size());
}

double loss_logloss(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  check_lengths(pred, truth, "loss_logloss");
  double total = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], kLogLossClip, 1.0 - kLogLossClip);
    total += truth[i] * std::log(p) + (1.0 - truth[i]) * std::log1p(-p);
  }
  return -total / static_cast<double>(pred.size());
}

double evaluate_loss(Loss loss, const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  return loss == Loss::mse ? loss_mse(pred, truth) : loss_logloss(pred, truth);
}

std::string_view to_string(Loss loss) noexcept {
  return loss == Loss::mse ? "mse" : "logloss";
}

Loss parse_loss(std::string_view text) {
  if (text == "mse") return Loss::mse;
  if (text == "logloss") return Loss::logloss;
  throw InvalidArgument("core", "unknown loss '" + std::string(text) + "'");
}

}  // namespace ateml
