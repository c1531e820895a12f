#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dqfd/database.hpp"
#include "dqfd/dialog_act.hpp"
#include "dqfd/dialog_state.hpp"
#include "dqfd/ontology.hpp"

namespace dqfd {

// Template kinds in lexicographic order of their names.
enum class TemplateKind { kBook, kBye, kGreet, kInform, kNoOffer, kOfferBooking, kReqMore, kRequest };

std::string_view template_kind_name(TemplateKind kind);

struct ActionTemplate {
  TemplateKind kind = TemplateKind::kReqMore;
  std::string domain;  // "general" for Greet/Bye/ReqMore
  std::string slot;    // empty unless Request/Inform

  friend bool operator==(const ActionTemplate&, const ActionTemplate&) = default;
};

std::string to_string(const ActionTemplate& action);

// The enumerated system actions. For every domain d:
//   Request(d, s)   for each informable slot s
//   Inform(d, s)    for each requestable slot s (value filled at execution)
//   OfferBooking(d), Book(d), NoOffer(d)
// plus the general Greet, Bye and ReqMore. Hence
//
//   |A| = sum_d (|informable_d| + |requestable_d| + 3) + 3
//
// which is 32 for the shipped desk ontology:
//   hotel 3+6+3, restaurant 3+6+3, taxi 2+0+3, general 3.
// Actions are sorted by (kind name, domain, slot).
class ActionSpace {
 public:
  ActionSpace() = default;
  explicit ActionSpace(std::vector<ActionTemplate> actions);

  std::size_t size() const { return actions_.size(); }
  const ActionTemplate& operator[](std::size_t i) const { return actions_.at(i); }
  const std::vector<ActionTemplate>& actions() const { return actions_; }

  std::optional<std::size_t> index_of(const ActionTemplate& action) const;
  // Throws std::out_of_range when the template is not enumerated.
  std::size_t index(TemplateKind kind, std::string_view domain = kGeneralDomain,
                    std::string_view slot = {}) const;

 private:
  std::vector<ActionTemplate> actions_;
};

std::size_t action_count_formula(const Ontology& ontology);

ActionSpace enumerate_actions(const Ontology& ontology);

struct ExecutedAction {
  std::vector<DialogAct> system_acts;
  std::optional<std::size_t> entity;  // DB entity the act refers to, if any
};

// Resolves an action template against the state and database and applies its
// system-side effects: Inform/OfferBooking/Book on a database domain offer the
// current entity (kept if it still matches, otherwise the first match), and an
// answered Inform clears the pending request. Booking confirmation is the
// environment's job and is not applied here.
ExecutedAction execute_action(DialogState& state, std::size_t action_index,
                              const ActionSpace& space, const EntityDatabase& db);

}  // namespace dqfd
