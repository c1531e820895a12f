#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace dqfd {

struct RAdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Adaptive (rectified) steps are taken once rho_t reaches this value.
  double rectify_threshold = 5.0;
};

// Rectified Adam. With m_hat, v_hat the bias-corrected moments and
//
//   rho_inf = 2 / (1 - beta2) - 1
//   rho_t   = rho_inf - 2 t beta2^t / (1 - beta2^t)
//
// a step is  theta -= lr * r_t * m_hat / (sqrt(v_hat) + eps)  when
// rho_t >= rectify_threshold, with
//
//   r_t = sqrt((rho_t - 4)(rho_t - 2) rho_inf / ((rho_inf - 4)(rho_inf - 2) rho_t)),
//
// and  theta -= lr * m_hat  otherwise.
class RAdam {
 public:
  RAdam() = default;
  RAdam(Eigen::Index size, RAdamConfig config);

  // `lr_scale` multiplies config().lr for this step (learning-rate schedule).
  // Throws std::invalid_argument on a non-finite gradient, leaving all state
  // untouched.
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr_scale = 1.0);

  std::int64_t t() const { return t_; }
  const Eigen::VectorXd& m() const { return m_; }
  const Eigen::VectorXd& v() const { return v_; }
  const RAdamConfig& config() const { return config_; }

  double rho(std::int64_t t) const;
  bool rectified(std::int64_t t) const { return rho(t) >= config_.rectify_threshold; }

 private:
  RAdamConfig config_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  std::int64_t t_ = 0;
};

// Multiplies the learning rate by `factor` every `step_frames` frames.
struct StepSchedule {
  std::int64_t step_frames = 500'000;
  double factor = 0.5;

  double scale_at(std::int64_t frame) const;
};

}  // namespace dqfd
