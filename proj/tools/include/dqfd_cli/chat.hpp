#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dqfd/action_space.hpp"
#include "dqfd/database.hpp"
#include "dqfd/dialog_state.hpp"
#include "dqfd/featurizer.hpp"
#include "dqfd/q_network.hpp"

namespace dqfd::cli {

// Dialog-act REPL against a frozen network. A human plays the user: each
// input line holds one or more acts separated by ';' in the grammar
// `intent [domain [slot[=value]]]`, or one of the commands
// `state`, `q`, `help`, `quit`.
class ChatSession {
 public:
  ChatSession(std::shared_ptr<const EntityDatabase> db, QNetwork net);

  // Handles one input line and returns the text to show.
  std::string handle(std::string_view line);

  bool finished() const { return finished_; }
  const DialogState& state() const { return state_; }
  // Highest Q-values for the current state, best first (ties by index).
  std::vector<std::pair<std::string, double>> top_actions(std::size_t k = 5) const;
  std::string describe_state() const;
  std::string goal_summary() const;

  static std::string help();

 private:
  std::string system_turn();

  std::shared_ptr<const EntityDatabase> db_;
  QNetwork net_;
  ActionSpace actions_;
  FeatureLayout layout_;
  DialogState state_;
  bool finished_ = false;
};

}  // namespace dqfd::cli
