#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dqfd/featurizer.hpp"
#include "dqfd/random.hpp"
#include "dqfd/sum_tree.hpp"

namespace dqfd {

struct Transition {
  FeatureVector s;
  std::uint32_t a = 0;
  double r = 0.0;
  FeatureVector s_next;
  bool terminal = false;
  bool is_demo = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct ReplayConfig {
  std::size_t capacity = 100'000;  // agent transitions; demos are stored on top
  double alpha = 0.6;
  double beta = 0.4;
  double eps_p = 0.001;
  double eps_d = 0.01;             // extra priority for demonstration transitions
  bool stratified = true;          // equal-mass strata vs. independent draws
};

struct Batch {
  std::vector<std::size_t> indices;
  std::vector<double> is_weights;  // max-normalized, in (0, 1]
  std::vector<const Transition*> transitions;

  std::size_t size() const { return indices.size(); }
};

// Proportional prioritized replay. Slots [0, demo_count) hold the
// demonstrations and are never overwritten; agent transitions occupy the
// following `capacity` slots as a ring.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(ReplayConfig config = {});

  // Demonstrations must all be pushed before the first agent transition.
  void push(Transition t);
  Batch sample(std::size_t batch_size, Rng& rng) const;
  void update_priorities(const std::vector<std::size_t>& indices,
                         const std::vector<double>& td_errors);

  std::size_t size() const { return items_.size(); }
  std::size_t demo_count() const { return demo_count_; }
  std::size_t agent_count() const { return items_.size() - demo_count_; }
  // Slot the next agent transition will be written to.
  std::size_t cursor() const { return demo_count_ + cursor_; }
  double max_priority() const { return max_priority_; }
  double priority(std::size_t i) const;     // p_i, before exponentiation
  double probability(std::size_t i) const;  // p_i^alpha / sum_j p_j^alpha
  const Transition& at(std::size_t i) const;
  const ReplayConfig& config() const { return config_; }
  const SumTree& tree() const { return tree_; }
  bool verify(double rel_tol = 1e-9) const { return tree_.verify(rel_tol); }

 private:
  void set_priority(std::size_t i, double p);

  ReplayConfig config_;
  std::vector<Transition> items_;
  std::vector<double> priorities_;
  SumTree tree_;
  std::size_t demo_count_ = 0;
  std::size_t cursor_ = 0;  // within the agent region
  bool agent_phase_ = false;
  double max_priority_ = 1.0;
};

}  // namespace dqfd
