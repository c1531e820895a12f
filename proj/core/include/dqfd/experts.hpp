#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dqfd/action_space.hpp"
#include "dqfd/database.hpp"
#include "dqfd/dialog_state.hpp"
#include "dqfd/featurizer.hpp"
#include "dqfd/random.hpp"

namespace dqfd {

// Anything that maps an observed dialog state to an action index.
using Policy = std::function<std::size_t(const DialogState&, const FeatureVector&)>;

struct ExpertKind {
  enum class Type { kRule, kWeak };
  Type type = Type::kRule;
  double error_rate = 0.0;  // only for kWeak, in [0, 1]

  static ExpertKind rule() { return {}; }
  static ExpertKind weak(double error_rate);
  std::string name() const;
};

// Deterministic priority cascade:
//   1. pending user request in a domain with a matching entity -> Inform it
//   2. active domain with an unconstrained informable slot -> Request the
//      first such slot
//   3. booking intent with an available entity (always for domains without
//      a database) -> Book
//   4. active database domain with db_count == 0 -> NoOffer
//   5. user said Bye -> Bye
//   otherwise ReqMore
std::size_t rule_act(const DialogState& state, const ActionSpace& actions,
                     const EntityDatabase& db);

// rule_act with probability 1 - error_rate, otherwise a uniform action. The
// rng is always advanced by exactly two draws so that sequences stay aligned
// across error rates.
std::size_t weak_act(const DialogState& state, const ActionSpace& actions,
                     const EntityDatabase& db, double error_rate, Rng& rng);

// Wraps an expert as a Policy; the weak expert owns a copy of `rng`.
Policy make_expert_policy(const ExpertKind& kind, const ActionSpace& actions,
                          std::shared_ptr<const EntityDatabase> db, Rng rng = Rng{});

}  // namespace dqfd
