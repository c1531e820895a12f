#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dqfd/dialog_state.hpp"
#include "dqfd/ontology.hpp"

namespace dqfd {

// 0/1 state features, one byte per position.
using FeatureVector = std::vector<std::uint8_t>;

// db_count buckets: {0}, {1}, {2..4}, {>=5}.
inline constexpr std::size_t kDbBuckets = 4;
// turn buckets: {0}, {1,2}, {3..5}, {6..10}, {11..20}, {>=21}.
inline constexpr std::size_t kTurnBuckets = 6;

std::size_t db_bucket(int db_count);
std::size_t turn_bucket(int turn);

// Offsets of each feature group. For every domain, in ontology order:
//
//   per informable slot: one flag per declared value, then one "dontcare" flag
//   per requestable slot: pending-request flag
//   database-backed domains only: kDbBuckets db_count flags
//   offered, booked, booking-requested, active-domain flags
//
// followed by the global block:
//
//   kIntentCount flags (intents present in the last user turn)
//   terminal flag
//   kTurnBuckets turn flags
//
// For the shipped desk ontology this is 26 + 27 + 12 + 15 = 80 positions.
class FeatureLayout {
 public:
  struct DomainBlock {
    std::size_t begin = 0;
    std::vector<std::size_t> slot_offsets;  // first value flag per informable slot
    std::size_t requested = 0;
    std::size_t db_bucket = 0;              // valid only for database domains
    std::size_t offered = 0;
    std::size_t booked = 0;
    std::size_t booking_requested = 0;
    std::size_t active = 0;
    std::size_t end = 0;
  };

  explicit FeatureLayout(const Ontology& ontology);

  std::size_t size() const { return size_; }
  const DomainBlock& domain(std::size_t d) const { return domains_[d]; }
  std::size_t intent_offset() const { return intents_; }
  std::size_t terminal_offset() const { return terminal_; }
  std::size_t turn_offset() const { return turn_; }

  // Closed-form length, evaluated independently of the offsets above.
  static std::size_t formula_size(const Ontology& ontology);

 private:
  std::vector<DomainBlock> domains_;
  std::size_t intents_ = 0;
  std::size_t terminal_ = 0;
  std::size_t turn_ = 0;
  std::size_t size_ = 0;
};

FeatureVector featurize(const DialogState& state, const Ontology& ontology);
FeatureVector featurize(const DialogState& state, const Ontology& ontology,
                        const FeatureLayout& layout);

}  // namespace dqfd
