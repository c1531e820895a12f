#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqfd/action_space.hpp"
#include "dqfd/database.hpp"
#include "dqfd/dialog_act.hpp"
#include "dqfd/dialog_state.hpp"
#include "dqfd/random.hpp"

namespace dqfd {

struct SimulatorConfig {
  int max_turns = 40;               // T_max
  std::size_t max_user_acts = 3;    // acts the user emits per turn
  double dontcare_prob = 0.1;       // per informable slot at goal creation
  double volunteer_prob = 0.3;      // constraint stated up front vs. on demand
  double request_prob = 0.6;        // per requestable slot
  double booking_prob = 0.7;        // database domains; others always book
  std::size_t min_goal_domains = 1;
  std::size_t max_goal_domains = 3;
  int max_goal_tries = 1000;

  double step_penalty() const { return -1.0; }
  double success_reward() const { return 2.0 * max_turns; }
  double failure_reward() const { return -static_cast<double>(max_turns); }
};

struct DomainGoal {
  std::size_t domain = 0;
  Constraints constraints;              // every informable slot: value or dontcare
  std::vector<std::string> volunteered; // stated unprompted, in slot order
  std::vector<std::string> requests;
  bool wants_booking = false;
  Constraints booking;

  friend bool operator==(const DomainGoal&, const DomainGoal&) = default;
};

struct UserGoal {
  std::vector<DomainGoal> domains;  // in conversation order

  const DomainGoal* find(std::size_t domain) const;
  std::size_t request_count() const;
  std::size_t booking_count() const;
  std::size_t constraint_count() const;  // informable (non-dontcare) + booking values

  friend bool operator==(const UserGoal&, const UserGoal&) = default;
};

class GoalSamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Picks min_goal_domains..max_goal_domains distinct domains in random order. Every domain
// states at least one constraint up front; database constraints are
// re-sampled until at least one entity matches. When any domain has
// requestable slots the goal requests at least one of them.
UserGoal sample_goal(const EntityDatabase& db, Rng& rng, const SimulatorConfig& config = {});

// Stack of pending user acts; the top is the back of the vector. Pushing an
// act removes an equal act already on the stack.
class Agenda {
 public:
  void push(DialogAct act);
  std::optional<DialogAct> pop();
  const DialogAct* top() const { return items_.empty() ? nullptr : &items_.back(); }
  bool remove(const DialogAct& act);
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  const std::vector<DialogAct>& items() const { return items_; }

 private:
  std::vector<DialogAct> items_;
};

// Initial agenda, popped in this order: per goal domain the volunteered
// Informs, then the Requests, then the booking details and Book; Bye last.
Agenda build_agenda(const UserGoal& goal, const Ontology& ontology);

struct EnvStepResult {
  std::vector<DialogAct> user_acts;
  double reward = 0.0;
  bool done = false;
  std::optional<bool> success;  // present iff done
};

struct TurnRecord {
  int turn = 0;
  std::string actor;  // "user" or "system"
  std::vector<DialogAct> acts;
  double reward = 0.0;
  std::optional<bool> inform_correct;    // system Inform of a requestable slot
  std::optional<bool> booking_accepted;  // system Book/OfferBooking in a goal domain
};

struct EpisodeLog {
  std::vector<TurnRecord> turns;
};

struct GoalReport {
  bool success = false;
  std::size_t wanted_bookings = 0;
  double booked_fraction = 0.0;  // 0 when no booking was wanted
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision over the distinct (domain, slot) pairs the system informed,
// recall over the goal's request slots; a pair counts as correct once it was
// answered from an entity consistent with the goal.
GoalReport evaluate_goal(const UserGoal& goal, const EpisodeLog& log);

// Line-delimited JSON: a goal header line, then one line per turn record.
void write_episode_log(std::ostream& out, const UserGoal& goal, const EpisodeLog& log,
                       const Ontology& ontology);

// Agenda-based simulated user wrapped as an episodic environment. The
// environment owns the system-side DialogState; the agent observes it (or its
// featurization) and picks action indices.
//
// Rewards: -1 every turn; on termination +2*T_max for success or -T_max for
// failure. Success is declared when every goal request has been answered from
// a goal-consistent entity and every wanted booking has been accepted; the
// user then says Bye. A Book executed for an entity or party details that
// contradict the goal cannot be undone, so that goal can no longer succeed. A system Bye ends the episode as a failure, as does
// reaching turn T_max.
class DialogEnv {
 public:
  struct ResetResult {
    std::vector<DialogAct> user_acts;
    DialogState state;
  };

  explicit DialogEnv(std::shared_ptr<const EntityDatabase> db, SimulatorConfig config = {});

  ResetResult reset(Rng& rng);
  ResetResult reset_with_goal(UserGoal goal);

  // Throws std::logic_error when the episode has already finished.
  EnvStepResult step(std::size_t action);

  const DialogState& state() const { return state_; }
  const UserGoal& goal() const { return goal_; }
  const EpisodeLog& log() const { return log_; }
  const Agenda& agenda() const { return agenda_; }
  const ActionSpace& actions() const { return actions_; }
  const EntityDatabase& database() const { return *db_; }
  const std::shared_ptr<const EntityDatabase>& database_ptr() const { return db_; }
  const SimulatorConfig& config() const { return config_; }
  bool done() const { return done_; }
  double episode_return() const { return return_; }
  std::size_t max_agenda_size() const { return max_agenda_; }

 private:
  struct DomainProgress {
    std::set<std::string> emitted_requests;
    std::map<std::string, std::string> answers;  // consistent answers
    std::vector<std::string> told_order;         // informable slots, oldest first
    bool booking_signaled = false;
    bool booked = false;
    bool misbooked = false;  // a booking went through for the wrong entity or details
  };

  DomainGoal* goal_for(std::size_t domain);
  bool consistent(const DomainGoal& g, std::optional<std::size_t> entity) const;
  bool booking_details_match(const DomainGoal& g) const;
  std::optional<DialogAct> reveal_violation(const DomainGoal& g,
                                            std::optional<std::size_t> entity) const;
  bool has_pending() const;
  bool goal_complete() const;
  bool obsolete(const DialogAct& act) const;
  void note_user_acts(const std::vector<DialogAct>& acts);
  std::vector<DialogAct> react(const ActionTemplate& action, const ExecutedAction& exec,
                               TurnRecord& record);
  // The opening turn never contains Book.
  void fill_from_agenda(std::vector<DialogAct>& acts, bool opening = false);
  ResetResult start();

  std::shared_ptr<const EntityDatabase> db_;
  SimulatorConfig config_;
  ActionSpace actions_;
  UserGoal goal_;
  Agenda agenda_;
  DialogState state_;
  EpisodeLog log_;
  std::vector<DomainProgress> progress_;  // indexed by ontology domain
  bool done_ = true;
  double return_ = 0.0;
  std::size_t max_agenda_ = 0;
};

}  // namespace dqfd
