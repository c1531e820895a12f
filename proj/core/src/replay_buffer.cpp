#include "dqfd/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dqfd {

ReplayBuffer::ReplayBuffer(ReplayConfig config) : config_(config) {
  if (config_.capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  if (config_.alpha < 0.0 || config_.beta < 0.0 || config_.eps_p <= 0.0 || config_.eps_d < 0.0)
    throw std::invalid_argument("invalid replay hyperparameters");
}

void ReplayBuffer::set_priority(std::size_t i, double p) {
  priorities_[i] = p;
  tree_.set(i, std::pow(p, config_.alpha));
  max_priority_ = std::max(max_priority_, p);
}

void ReplayBuffer::push(Transition t) {
  if (t.is_demo) {
    if (agent_phase_) throw std::logic_error("demonstration pushed after agent transitions");
    items_.push_back(std::move(t));
    priorities_.push_back(0.0);
    set_priority(items_.size() - 1, max_priority_);
    demo_count_ = items_.size();
    return;
  }
  agent_phase_ = true;
  const std::size_t slot = demo_count_ + cursor_;
  if (slot == items_.size()) {
    items_.push_back(std::move(t));
    priorities_.push_back(0.0);
  } else {
    items_[slot] = std::move(t);
  }
  set_priority(slot, max_priority_);
  cursor_ = (cursor_ + 1) % config_.capacity;
}

Batch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (items_.empty()) throw std::logic_error("sample from an empty replay buffer");
  Batch batch;
  batch.indices.reserve(batch_size);
  batch.is_weights.reserve(batch_size);
  batch.transitions.reserve(batch_size);
  const double total = tree_.total();
  const double stratum = total / static_cast<double>(batch_size);
  const double n = static_cast<double>(items_.size());
  double max_w = 0.0;
  for (std::size_t k = 0; k < batch_size; ++k) {
    const double mass = config_.stratified
                            ? stratum * (static_cast<double>(k) + uniform01(rng))
                            : total * uniform01(rng);
    const std::size_t i = tree_.find(mass);
    const double w = std::pow(n * tree_.get(i) / total, -config_.beta);
    batch.indices.push_back(i);
    batch.is_weights.push_back(w);
    batch.transitions.push_back(&items_[i]);
    max_w = std::max(max_w, w);
  }
  for (auto& w : batch.is_weights) w /= max_w;
  return batch;
}

void ReplayBuffer::update_priorities(const std::vector<std::size_t>& indices,
                                     const std::vector<double>& td_errors) {
  if (indices.size() != td_errors.size())
    throw std::invalid_argument("indices and td_errors differ in length");
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= items_.size()) throw std::out_of_range("replay index out of range");
    if (!std::isfinite(td_errors[k])) throw std::invalid_argument("non-finite TD error");
    const double p = std::abs(td_errors[k]) + config_.eps_p +
                     (items_[i].is_demo ? config_.eps_d : 0.0);
    set_priority(i, p);
  }
}

double ReplayBuffer::priority(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay index out of range");
  return priorities_[i];
}

double ReplayBuffer::probability(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay index out of range");
  return tree_.get(i) / tree_.total();
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay index out of range");
  return items_[i];
}

}  // namespace dqfd
