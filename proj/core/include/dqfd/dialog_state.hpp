#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dqfd/database.hpp"
#include "dqfd/dialog_act.hpp"
#include "dqfd/ontology.hpp"

namespace dqfd {

struct DomainState {
  Constraints constraints;            // informable slot -> value or "dontcare"
  Constraints booking_info;           // booking slot -> value
  std::set<std::string> requested;    // pending (unanswered) user requests
  int db_count = 0;                   // matches for `constraints`
  std::optional<std::size_t> offered_entity;
  bool booked = false;
  bool booking_requested = false;     // user asked to book, not yet booked

  friend bool operator==(const DomainState&, const DomainState&) = default;
};

// System-side view of the conversation, one DomainState per ontology domain.
struct DialogState {
  std::vector<DomainState> domains;
  int turn = 0;
  std::vector<DialogAct> last_user_acts;
  std::optional<std::size_t> active_domain;  // domain of the latest user act
  bool terminated = false;
  int ignored_acts = 0;  // diagnostics: acts on unknown domains/slots/values

  friend bool operator==(const DialogState&, const DialogState&) = default;
};

// Fresh state: no constraints, db_count = full table size per domain.
DialogState initial_state(const EntityDatabase& db);

// Rule-based tracking of user acts. Inform overwrites constraints (or records
// booking details), Request adds to `requested`, Book marks booking intent,
// Bye terminates. db_count is re-queried for every domain whose constraints
// changed and a stale offer is dropped. Unknown slots are counted, not fatal.
DialogState track_state(const DialogState& state, std::span<const DialogAct> user_acts,
                        const EntityDatabase& db);

}  // namespace dqfd
