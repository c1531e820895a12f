#include "dqfd/action_space.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <tuple>

namespace dqfd {

namespace {

constexpr std::array<std::string_view, 8> kKindNames = {
    "Book", "Bye", "Greet", "Inform", "NoOffer", "OfferBooking", "ReqMore", "Request"};

std::optional<std::size_t> current_entity(const DialogState& state, std::size_t d,
                                          const EntityDatabase& db) {
  const auto& ds = state.domains[d];
  if (ds.offered_entity && db.matches(d, *ds.offered_entity, ds.constraints))
    return ds.offered_entity;
  const auto hits = db.query(d, ds.constraints);
  if (hits.empty()) return std::nullopt;
  return hits.front();
}

}  // namespace

std::string_view template_kind_name(TemplateKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::string to_string(const ActionTemplate& action) {
  std::string out(template_kind_name(action.kind));
  out += '(';
  if (action.domain != kGeneralDomain) {
    out += action.domain;
    if (!action.slot.empty()) out += ", " + action.slot;
  }
  out += ')';
  return out;
}

ActionSpace::ActionSpace(std::vector<ActionTemplate> actions)
    : actions_(std::move(actions)) {}

std::optional<std::size_t> ActionSpace::index_of(const ActionTemplate& action) const {
  const auto it = std::find(actions_.begin(), actions_.end(), action);
  if (it == actions_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - actions_.begin());
}

std::size_t ActionSpace::index(TemplateKind kind, std::string_view domain,
                               std::string_view slot) const {
  const auto i = index_of(ActionTemplate{kind, std::string(domain), std::string(slot)});
  if (!i)
    throw std::out_of_range("action not enumerated: " +
                            to_string(ActionTemplate{kind, std::string(domain),
                                                     std::string(slot)}));
  return *i;
}

std::size_t action_count_formula(const Ontology& ontology) {
  std::size_t n = 3;
  for (const auto& d : ontology.domains)
    n += d.informable.size() + d.requestable.size() + 3;
  return n;
}

ActionSpace enumerate_actions(const Ontology& ontology) {
  std::vector<ActionTemplate> actions;
  for (const auto& d : ontology.domains) {
    for (const auto& s : d.informable)
      actions.push_back({TemplateKind::kRequest, d.name, s.name});
    for (const auto& s : d.requestable)
      actions.push_back({TemplateKind::kInform, d.name, s});
    actions.push_back({TemplateKind::kOfferBooking, d.name, {}});
    actions.push_back({TemplateKind::kBook, d.name, {}});
    actions.push_back({TemplateKind::kNoOffer, d.name, {}});
  }
  for (auto kind : {TemplateKind::kGreet, TemplateKind::kBye, TemplateKind::kReqMore})
    actions.push_back({kind, std::string(kGeneralDomain), {}});

  std::sort(actions.begin(), actions.end(),
            [](const ActionTemplate& a, const ActionTemplate& b) {
              return std::make_tuple(template_kind_name(a.kind), std::string_view(a.domain),
                                     std::string_view(a.slot)) <
                     std::make_tuple(template_kind_name(b.kind), std::string_view(b.domain),
                                     std::string_view(b.slot));
            });
  return ActionSpace(std::move(actions));
}

ExecutedAction execute_action(DialogState& state, std::size_t action_index,
                              const ActionSpace& space, const EntityDatabase& db) {
  const auto& action = space[action_index];
  ExecutedAction out;

  switch (action.kind) {
    case TemplateKind::kGreet:
      out.system_acts.push_back(make_general_act(Intent::kGreet));
      return out;
    case TemplateKind::kBye:
      out.system_acts.push_back(make_general_act(Intent::kBye));
      return out;
    case TemplateKind::kReqMore:
      out.system_acts.push_back(make_general_act(Intent::kReqMore));
      return out;
    default:
      break;
  }

  const auto& ontology = db.ontology();
  const auto d = ontology.find_domain(action.domain);
  if (!d) throw std::logic_error("action refers to unknown domain " + action.domain);
  auto& ds = state.domains[*d];
  const bool has_db = ontology.domains[*d].has_database;

  if (has_db && (action.kind == TemplateKind::kInform ||
                 action.kind == TemplateKind::kOfferBooking ||
                 action.kind == TemplateKind::kBook)) {
    out.entity = current_entity(state, *d, db);
    if (out.entity) ds.offered_entity = out.entity;
  }

  switch (action.kind) {
    case TemplateKind::kRequest:
      out.system_acts.push_back(make_request(action.domain, action.slot));
      break;
    case TemplateKind::kInform:
      if (out.entity) {
        const auto& e = db.entities(*d)[*out.entity];
        out.system_acts.push_back(make_inform(action.domain, action.slot, e.slots.at(action.slot)));
        ds.requested.erase(action.slot);
      } else {
        out.system_acts.push_back(make_inform(action.domain, action.slot, "none"));
      }
      break;
    case TemplateKind::kOfferBooking:
      out.system_acts.push_back(make_domain_act(Intent::kOfferBooking, action.domain));
      break;
    case TemplateKind::kBook:
      out.system_acts.push_back(make_domain_act(Intent::kBook, action.domain));
      break;
    case TemplateKind::kNoOffer:
      out.system_acts.push_back(make_domain_act(Intent::kNoOffer, action.domain));
      break;
    default:
      break;
  }
  return out;
}

}  // namespace dqfd
