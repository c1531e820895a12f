#include "dqfd/featurizer.hpp"

#include <cassert>
#include <stdexcept>

namespace dqfd {

std::size_t db_bucket(int db_count) {
  if (db_count <= 0) return 0;
  if (db_count == 1) return 1;
  if (db_count <= 4) return 2;
  return 3;
}

std::size_t turn_bucket(int turn) {
  if (turn <= 0) return 0;
  if (turn <= 2) return 1;
  if (turn <= 5) return 2;
  if (turn <= 10) return 3;
  if (turn <= 20) return 4;
  return 5;
}

FeatureLayout::FeatureLayout(const Ontology& ontology) {
  std::size_t pos = 0;
  for (const auto& d : ontology.domains) {
    DomainBlock block;
    block.begin = pos;
    for (const auto& s : d.informable) {
      block.slot_offsets.push_back(pos);
      pos += s.values.size() + 1;
    }
    block.requested = pos;
    pos += d.requestable.size();
    if (d.has_database) {
      block.db_bucket = pos;
      pos += kDbBuckets;
    }
    block.offered = pos++;
    block.booked = pos++;
    block.booking_requested = pos++;
    block.active = pos++;
    block.end = pos;
    domains_.push_back(std::move(block));
  }
  intents_ = pos;
  pos += kIntentCount;
  terminal_ = pos++;
  turn_ = pos;
  pos += kTurnBuckets;
  size_ = pos;
  if (size_ != formula_size(ontology))
    throw std::logic_error("feature layout disagrees with its size formula");
}

std::size_t FeatureLayout::formula_size(const Ontology& ontology) {
  std::size_t n = kIntentCount + 1 + kTurnBuckets;
  for (const auto& d : ontology.domains) {
    for (const auto& s : d.informable) n += s.values.size() + 1;
    n += d.requestable.size() + 4;
    if (d.has_database) n += kDbBuckets;
  }
  return n;
}

FeatureVector featurize(const DialogState& state, const Ontology& ontology) {
  return featurize(state, ontology, FeatureLayout(ontology));
}

FeatureVector featurize(const DialogState& state, const Ontology& ontology,
                        const FeatureLayout& layout) {
  FeatureVector x(layout.size(), 0);
  for (std::size_t d = 0; d < ontology.domains.size(); ++d) {
    const auto& spec = ontology.domains[d];
    const auto& block = layout.domain(d);
    const auto& ds = state.domains[d];

    for (std::size_t s = 0; s < spec.informable.size(); ++s) {
      const auto it = ds.constraints.find(spec.informable[s].name);
      if (it == ds.constraints.end()) continue;
      const auto& values = spec.informable[s].values;
      std::size_t v = values.size();  // dontcare position
      for (std::size_t k = 0; k < values.size(); ++k)
        if (values[k] == it->second) v = k;
      x[block.slot_offsets[s] + v] = 1;
    }
    for (std::size_t r = 0; r < spec.requestable.size(); ++r)
      if (ds.requested.contains(spec.requestable[r])) x[block.requested + r] = 1;
    if (spec.has_database) x[block.db_bucket + db_bucket(ds.db_count)] = 1;
    x[block.offered] = ds.offered_entity.has_value();
    x[block.booked] = ds.booked;
    x[block.booking_requested] = ds.booking_requested;
    x[block.active] = state.active_domain == d;
  }
  for (const auto& act : state.last_user_acts)
    x[layout.intent_offset() + static_cast<std::size_t>(act.intent)] = 1;
  x[layout.terminal_offset()] = state.terminated;
  x[layout.turn_offset() + turn_bucket(state.turn)] = 1;
  return x;
}

}  // namespace dqfd
