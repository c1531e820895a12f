#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dqfd/experts.hpp"
#include "dqfd/q_network.hpp"
#include "dqfd/radam.hpp"
#include "dqfd/random.hpp"
#include "dqfd/replay_buffer.hpp"

namespace dqfd {

enum class Mode { kDqn, kDqfd };

std::string mode_name(Mode mode);
Mode parse_mode(const std::string& text);  // "dqn" / "dqfd", case-insensitive

struct AgentConfig {
  Mode mode = Mode::kDqfd;
  double gamma = 0.9;
  double eps_start = 0.1;
  double eps_end = 0.01;
  std::int64_t eps_decay_frames = 50'000;
  std::int64_t total_frames = 250'000;  // demonstration frames included
  std::int64_t train_every = 1'000;
  std::int64_t batches_per_round = 2'000;
  std::size_t batch_size = 32;
  double tau = 0.8;
  double margin_weight = 1.0;
  double l2 = 1e-5;
  std::size_t hidden = 100;
  std::size_t pretrain_demo_episodes = 500;
  std::int64_t pretrain_gradient_steps = 5'000;
  // false: the expert fills the buffer first, then the gradient steps run.
  // true: one training round per train_every expert frames instead.
  bool pretrain_train_while_collecting = false;
  ExpertKind demo_source = ExpertKind::rule();
  std::int64_t checkpoint_every = 25'000;
  RAdamConfig optimizer{.lr = 0.003};
  StepSchedule lr_schedule{50'000, 0.5};
  ReplayConfig replay;

  static AgentConfig desk();   // 250k frames, schedules scaled down 10x, lr 0.003
  static AgentConfig paper();  // 2.5M frames, lr 0.01

  // Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

// Linear from eps_start at frame 0 to eps_end at eps_decay_frames, then flat.
double epsilon_at(std::int64_t frame, const AgentConfig& config);

// Uniform action with probability epsilon, otherwise the argmax of q with the
// lowest index winning ties.
std::size_t select_action(const Eigen::VectorXd& q, double epsilon, Rng& rng);
std::size_t greedy_action(const Eigen::VectorXd& q);

// Double-DQN targets: y = r for terminal transitions, otherwise
// y = r + gamma * Q_target(s', argmax_a Q_online(s', a)).
std::vector<double> compute_targets(std::span<const Transition* const> batch,
                                    const QNetwork& online, const QNetwork& target,
                                    double gamma);

// max_a [q_a + l(a_E, a)] - q_{a_E}, with l = 0 for a = a_E and tau otherwise.
double margin_loss(const Eigen::VectorXd& q, std::size_t expert_action, double tau);

struct LossResult {
  double loss = 0.0;         // td + margin_weight * margin + l2 term
  double td_loss = 0.0;      // (1/B) sum w_i delta_i^2
  double margin = 0.0;       // sum over demo samples of margin_loss
  std::vector<double> td;    // delta_i = y_i - Q(s_i, a_i), for priorities
  Eigen::VectorXd grad;
};

// Batch objective. The margin term is applied to demo samples only and only
// in DQfD mode; it is not importance weighted.
LossResult total_loss(std::span<const Transition* const> batch, std::span<const double> weights,
                      const QNetwork& online, const QNetwork& target, const AgentConfig& config);

// Online/target networks, optimizer and replay memory.
class Agent {
 public:
  Agent(std::size_t input, std::size_t actions, const AgentConfig& config, Rng& init_rng);

  const AgentConfig& config() const { return config_; }
  const QNetwork& online() const { return online_; }
  QNetwork& online() { return online_; }
  const QNetwork& target() const { return target_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const RAdam& optimizer() const { return optimizer_; }

  void sync_target() { target_ = online_; }
  std::size_t act(const FeatureVector& x, double epsilon, Rng& rng) const;

  // Samples a batch, applies one optimizer step at the learning rate for
  // `frame`, and refreshes the sampled priorities. Throws
  // std::runtime_error on a non-finite loss.
  LossResult train_step(Rng& rng, std::int64_t frame);

 private:
  AgentConfig config_;
  QNetwork online_;
  QNetwork target_;
  RAdam optimizer_;
  ReplayBuffer buffer_;
};

// Greedy policy over a frozen network snapshot.
Policy greedy_policy(std::shared_ptr<const QNetwork> net);

}  // namespace dqfd
