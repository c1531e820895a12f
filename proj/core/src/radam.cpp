#include "dqfd/radam.hpp"

#include <cmath>
#include <stdexcept>

namespace dqfd {

RAdam::RAdam(Eigen::Index size, RAdamConfig config)
    : config_(config), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {
  if (!(config_.lr > 0.0) || !(config_.beta1 >= 0.0 && config_.beta1 < 1.0) ||
      !(config_.beta2 > 0.0 && config_.beta2 < 1.0) || !(config_.eps > 0.0))
    throw std::invalid_argument("invalid RAdam hyperparameters");
}

double RAdam::rho(std::int64_t t) const {
  const double b2t = std::pow(config_.beta2, static_cast<double>(t));
  const double rho_inf = 2.0 / (1.0 - config_.beta2) - 1.0;
  return rho_inf - 2.0 * static_cast<double>(t) * b2t / (1.0 - b2t);
}

void RAdam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr_scale) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw std::invalid_argument("RAdam: parameter/gradient size mismatch");
  if (!grad.allFinite()) throw std::invalid_argument("RAdam: non-finite gradient");

  ++t_;
  const double t = static_cast<double>(t_);
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  m_ = b1 * m_ + (1.0 - b1) * grad;
  v_ = b2 * v_ + (1.0 - b2) * grad.cwiseAbs2();

  const double lr = config_.lr * lr_scale;
  const double bc1 = 1.0 - std::pow(b1, t);
  const double bc2 = 1.0 - std::pow(b2, t);
  const double rho_inf = 2.0 / (1.0 - b2) - 1.0;
  const double rho_t = rho(t_);
  if (rho_t >= config_.rectify_threshold) {
    const double r = std::sqrt((rho_t - 4.0) * (rho_t - 2.0) * rho_inf /
                               ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
    params.array() -= lr * r * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + config_.eps);
  } else {
    params -= (lr / bc1) * m_;
  }
}

double StepSchedule::scale_at(std::int64_t frame) const {
  if (step_frames <= 0) return 1.0;
  return std::pow(factor, static_cast<double>(frame / step_frames));
}

}  // namespace dqfd
