#include "dqfd/experts.hpp"

#include <memory>
#include <sstream>
#include <stdexcept>

namespace dqfd {

ExpertKind ExpertKind::weak(double error_rate) {
  if (!(error_rate >= 0.0 && error_rate <= 1.0))
    throw std::invalid_argument("error_rate must lie in [0, 1]");
  return {Type::kWeak, error_rate};
}

std::string ExpertKind::name() const {
  if (type == Type::kRule) return "rule";
  std::ostringstream out;
  out << "weak(" << error_rate << ")";
  return out.str();
}

std::size_t rule_act(const DialogState& state, const ActionSpace& actions,
                     const EntityDatabase& db) {
  const auto& ontology = db.ontology();

  for (std::size_t d = 0; d < ontology.domains.size(); ++d) {
    const auto& spec = ontology.domains[d];
    const auto& ds = state.domains[d];
    if (ds.requested.empty() || !spec.has_database || ds.db_count < 1) continue;
    for (const auto& slot : spec.requestable)
      if (ds.requested.contains(slot))
        return actions.index(TemplateKind::kInform, spec.name, slot);
  }

  const auto active = state.active_domain;
  if (active) {
    const auto& spec = ontology.domains[*active];
    const auto& ds = state.domains[*active];
    for (const auto& slot : spec.informable)
      if (!ds.constraints.contains(slot.name))
        return actions.index(TemplateKind::kRequest, spec.name, slot.name);
  }

  for (std::size_t d = 0; d < ontology.domains.size(); ++d) {
    const auto& spec = ontology.domains[d];
    const auto& ds = state.domains[d];
    if (ds.booking_requested && !ds.booked && (!spec.has_database || ds.db_count >= 1))
      return actions.index(TemplateKind::kBook, spec.name);
  }

  if (active) {
    const auto& spec = ontology.domains[*active];
    if (spec.has_database && state.domains[*active].db_count == 0)
      return actions.index(TemplateKind::kNoOffer, spec.name);
  }

  for (const auto& act : state.last_user_acts)
    if (act.intent == Intent::kBye) return actions.index(TemplateKind::kBye);

  return actions.index(TemplateKind::kReqMore);
}

std::size_t weak_act(const DialogState& state, const ActionSpace& actions,
                     const EntityDatabase& db, double error_rate, Rng& rng) {
  const bool corrupt = bernoulli(rng, error_rate);
  const std::size_t random_action = uniform_index(rng, actions.size());
  return corrupt ? random_action : rule_act(state, actions, db);
}

Policy make_expert_policy(const ExpertKind& kind, const ActionSpace& actions,
                          std::shared_ptr<const EntityDatabase> db, Rng rng) {
  if (kind.type == ExpertKind::Type::kRule) {
    return [actions, db](const DialogState& s, const FeatureVector&) {
      return rule_act(s, actions, *db);
    };
  }
  auto shared_rng = std::make_shared<Rng>(rng);
  const double error_rate = kind.error_rate;
  return [actions, db, shared_rng, error_rate](const DialogState& s, const FeatureVector&) {
    return weak_act(s, actions, *db, error_rate, *shared_rng);
  };
}

}  // namespace dqfd
