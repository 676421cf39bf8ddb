#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace ateml {

enum class Loss { mse, logloss };

constexpr double kLogLossClip = 1e-12;

double loss_mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

// Negative mean Bernoulli log-likelihood; predictions clipped to [eps, 1-eps].
double loss_logloss(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

double evaluate_loss(Loss loss, const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

std::string_view to_string(Loss loss) noexcept;
Loss parse_loss(std::string_view text);

}  // namespace ateml
