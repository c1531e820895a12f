#include "dqfd/agent.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace dqfd {

std::string mode_name(Mode mode) { return mode == Mode::kDqn ? "dqn" : "dqfd"; }

Mode parse_mode(const std::string& text) {
  std::string lower;
  for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "dqn") return Mode::kDqn;
  if (lower == "dqfd") return Mode::kDqfd;
  throw std::invalid_argument("unknown mode '" + text + "' (expected dqn or dqfd)");
}

AgentConfig AgentConfig::desk() { return AgentConfig{}; }

AgentConfig AgentConfig::paper() {
  AgentConfig c;
  c.total_frames = 2'500'000;
  c.eps_decay_frames = 500'000;
  c.optimizer.lr = 0.01;
  c.lr_schedule.step_frames = 500'000;
  c.checkpoint_every = 100'000;
  return c;
}

void AgentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("config: " + field + " " + why);
  };
  if (!(eps_end >= 0.0 && eps_end <= eps_start && eps_start <= 1.0))
    fail("eps_start/eps_end", "must satisfy 0 <= eps_end <= eps_start <= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma", "must lie in (0, 1)");
  if (!(tau > 0.0)) fail("tau", "must be positive");
  if (!(margin_weight >= 0.0)) fail("margin_weight", "must be non-negative");
  if (!(l2 >= 0.0)) fail("l2", "must be non-negative");
  if (eps_decay_frames < 0) fail("eps_decay_frames", "must be non-negative");
  if (total_frames <= 0) fail("total_frames", "must be positive");
  if (train_every <= 0) fail("train_every", "must be positive");
  if (batches_per_round < 0) fail("batches_per_round", "must be non-negative");
  if (batch_size == 0) fail("batch_size", "must be positive");
  if (hidden == 0) fail("hidden", "must be positive");
  if (pretrain_gradient_steps < 0) fail("pretrain_gradient_steps", "must be non-negative");
  if (checkpoint_every <= 0) fail("checkpoint_every", "must be positive");
  if (!(optimizer.lr > 0.0)) fail("lr", "must be positive");
  if (!(lr_schedule.factor > 0.0)) fail("lr_decay", "must be positive");
  if (replay.capacity == 0) fail("replay_capacity", "must be positive");
  if (demo_source.type == ExpertKind::Type::kWeak &&
      !(demo_source.error_rate >= 0.0 && demo_source.error_rate <= 1.0))
    fail("error_rate", "must lie in [0, 1]");
}

double epsilon_at(std::int64_t frame, const AgentConfig& config) {
  if (frame <= 0) return config.eps_start;
  if (frame >= config.eps_decay_frames) return config.eps_end;
  const double f = static_cast<double>(frame) / static_cast<double>(config.eps_decay_frames);
  return config.eps_start + f * (config.eps_end - config.eps_start);
}

std::size_t greedy_action(const Eigen::VectorXd& q) {
  if (q.size() == 0) throw std::invalid_argument("empty Q vector");
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < q.size(); ++a)
    if (q[a] > q[best]) best = a;
  return static_cast<std::size_t>(best);
}

std::size_t select_action(const Eigen::VectorXd& q, double epsilon, Rng& rng) {
  if (q.size() == 0) throw std::invalid_argument("empty Q vector");
  if (bernoulli(rng, epsilon)) return uniform_index(rng, static_cast<std::size_t>(q.size()));
  return greedy_action(q);
}

namespace {

std::vector<const FeatureVector*> next_states(std::span<const Transition* const> batch) {
  std::vector<const FeatureVector*> xs;
  xs.reserve(batch.size());
  for (const auto* t : batch) xs.push_back(&t->s_next);
  return xs;
}

// Index attaining max_a [q_a + l(a_E, a)], lowest index on ties.
std::size_t margin_argmax(const Eigen::VectorXd& q, std::size_t expert_action, double tau) {
  std::size_t best = 0;
  double best_value = -INFINITY;
  for (Eigen::Index a = 0; a < q.size(); ++a) {
    const double v = q[a] + (static_cast<std::size_t>(a) == expert_action ? 0.0 : tau);
    if (v > best_value) {
      best_value = v;
      best = static_cast<std::size_t>(a);
    }
  }
  return best;
}

}  // namespace

std::vector<double> compute_targets(std::span<const Transition* const> batch,
                                    const QNetwork& online, const QNetwork& target,
                                    double gamma) {
  if (batch.empty()) throw std::invalid_argument("compute_targets: empty batch");
  const auto xs = next_states(batch);
  const auto q_online = online.forward_batch(xs);
  const auto q_target = target.forward_batch(xs);
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& t = *batch[i];
    if (t.terminal) {
      y[i] = t.r;
      continue;
    }
    const auto col = static_cast<Eigen::Index>(i);
    const std::size_t a_star = greedy_action(q_online.col(col));
    y[i] = t.r + gamma * q_target(static_cast<Eigen::Index>(a_star), col);
  }
  return y;
}

double margin_loss(const Eigen::VectorXd& q, std::size_t expert_action, double tau) {
  if (expert_action >= static_cast<std::size_t>(q.size()))
    throw std::out_of_range("margin_loss: expert action out of range");
  const std::size_t a = margin_argmax(q, expert_action, tau);
  const double l = a == expert_action ? 0.0 : tau;
  return q[static_cast<Eigen::Index>(a)] + l - q[static_cast<Eigen::Index>(expert_action)];
}

LossResult total_loss(std::span<const Transition* const> batch, std::span<const double> weights,
                      const QNetwork& online, const QNetwork& target, const AgentConfig& config) {
  const std::size_t n = batch.size();
  if (n == 0 || weights.size() != n) throw std::invalid_argument("total_loss: bad batch");

  const auto y = compute_targets(batch, online, target, config.gamma);
  std::vector<const FeatureVector*> xs;
  xs.reserve(n);
  for (const auto* t : batch) xs.push_back(&t->s);
  const auto cache = online.forward_cache(xs);

  LossResult out;
  out.td.resize(n);
  QNetwork::Matrix dq = QNetwork::Matrix::Zero(cache.q.rows(), cache.q.cols());
  const double inv_b = 1.0 / static_cast<double>(n);
  const bool use_margin = config.mode == Mode::kDqfd && config.margin_weight != 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = *batch[i];
    const auto b = static_cast<Eigen::Index>(i);
    const auto a = static_cast<Eigen::Index>(t.a);
    const double delta = y[i] - cache.q(a, b);
    out.td[i] = delta;
    out.td_loss += inv_b * weights[i] * delta * delta;
    dq(a, b) -= 2.0 * inv_b * weights[i] * delta;
    if (use_margin && t.is_demo) {
      const Eigen::VectorXd q = cache.q.col(b);
      out.margin += margin_loss(q, t.a, config.tau);
      const auto top = static_cast<Eigen::Index>(margin_argmax(q, t.a, config.tau));
      if (top != a) {
        dq(top, b) += config.margin_weight;
        dq(a, b) -= config.margin_weight;
      }
    }
  }
  out.grad = online.backward(cache, dq);
  out.loss = out.td_loss + config.margin_weight * out.margin;
  if (config.l2 != 0.0) {
    out.loss += config.l2 * online.params().squaredNorm();
    out.grad += 2.0 * config.l2 * online.params();
  }
  return out;
}

Agent::Agent(std::size_t input, std::size_t actions, const AgentConfig& config, Rng& init_rng)
    : config_(config),
      online_(QNetwork::initialized({input, config.hidden, actions}, init_rng)),
      target_(online_),
      optimizer_(online_.params().size(), config.optimizer),
      buffer_(config.replay) {
  config_.validate();
}

std::size_t Agent::act(const FeatureVector& x, double epsilon, Rng& rng) const {
  return select_action(online_.forward(x), epsilon, rng);
}

LossResult Agent::train_step(Rng& rng, std::int64_t frame) {
  const Batch batch = buffer_.sample(config_.batch_size, rng);
  LossResult loss = total_loss(batch.transitions, batch.is_weights, online_, target_, config_);
  if (!std::isfinite(loss.loss) || !loss.grad.allFinite())
    throw std::runtime_error("non-finite loss at frame " + std::to_string(frame) +
                             " (td " + std::to_string(loss.td_loss) + ", margin " +
                             std::to_string(loss.margin) + ", |theta| " +
                             std::to_string(online_.params().norm()) + ")");
  optimizer_.step(online_.params(), loss.grad, config_.lr_schedule.scale_at(frame));
  buffer_.update_priorities(batch.indices, loss.td);
  return loss;
}

Policy greedy_policy(std::shared_ptr<const QNetwork> net) {
  return [net](const DialogState&, const FeatureVector& x) { return greedy_action(net->forward(x)); };
}

}  // namespace dqfd
