#include "dqfd/dialog_state.hpp"

namespace dqfd {

DialogState initial_state(const EntityDatabase& db) {
  const auto& ontology = db.ontology();
  DialogState state;
  state.domains.resize(ontology.domains.size());
  for (std::size_t d = 0; d < ontology.domains.size(); ++d)
    state.domains[d].db_count = static_cast<int>(db.entities(d).size());
  return state;
}

DialogState track_state(const DialogState& state, std::span<const DialogAct> user_acts,
                        const EntityDatabase& db) {
  const auto& ontology = db.ontology();
  DialogState next = state;
  std::vector<bool> changed(ontology.domains.size(), false);

  for (const auto& act : user_acts) {
    if (act.intent == Intent::kBye) {
      next.terminated = true;
      continue;
    }
    if (act.intent == Intent::kGreet || act.intent == Intent::kReqMore) continue;

    const auto d = ontology.find_domain(act.domain);
    if (!d || !is_well_formed(act)) {
      ++next.ignored_acts;
      continue;
    }
    const auto& spec = ontology.domains[*d];
    auto& ds = next.domains[*d];
    bool used = true;
    switch (act.intent) {
      case Intent::kInform:
        if (const auto i = spec.informable_index(*act.slot)) {
          if (*act.value == kDontCare || spec.informable[*i].has_value(*act.value)) {
            ds.constraints[*act.slot] = *act.value;
            changed[*d] = true;
          } else {
            used = false;
          }
        } else if (const auto b = spec.booking_index(*act.slot);
                   b && spec.booking[*b].has_value(*act.value)) {
          ds.booking_info[*act.slot] = *act.value;
        } else {
          used = false;
        }
        break;
      case Intent::kRequest:
        if (spec.requestable_index(*act.slot))
          ds.requested.insert(*act.slot);
        else
          used = false;
        break;
      case Intent::kBook:
        if (spec.bookable && !ds.booked)
          ds.booking_requested = true;
        else if (!spec.bookable)
          used = false;
        break;
      default:
        // OfferBooking / NoOffer are system-side intents.
        used = false;
        break;
    }
    if (used)
      next.active_domain = *d;
    else
      ++next.ignored_acts;
  }

  for (std::size_t d = 0; d < changed.size(); ++d) {
    if (!changed[d] || !ontology.domains[d].has_database) continue;
    auto& ds = next.domains[d];
    ds.db_count = static_cast<int>(db.query(d, ds.constraints).size());
    if (ds.offered_entity && !db.matches(d, *ds.offered_entity, ds.constraints))
      ds.offered_entity.reset();
  }
  next.last_user_acts.assign(user_acts.begin(), user_acts.end());
  return next;
}

}  // namespace dqfd
