#include "dqfd/user_simulator.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

namespace dqfd {

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

const DomainGoal* UserGoal::find(std::size_t domain) const {
  for (const auto& g : domains)
    if (g.domain == domain) return &g;
  return nullptr;
}

std::size_t UserGoal::request_count() const {
  std::size_t n = 0;
  for (const auto& g : domains) n += g.requests.size();
  return n;
}

std::size_t UserGoal::booking_count() const {
  return static_cast<std::size_t>(
      std::count_if(domains.begin(), domains.end(), [](const DomainGoal& g) { return g.wants_booking; }));
}

std::size_t UserGoal::constraint_count() const {
  std::size_t n = 0;
  for (const auto& g : domains) {
    for (const auto& [slot, value] : g.constraints)
      if (value != kDontCare) ++n;
    if (g.wants_booking) n += g.booking.size();
  }
  return n;
}

UserGoal sample_goal(const EntityDatabase& db, Rng& rng, const SimulatorConfig& config) {
  const auto& ontology = db.ontology();
  const std::size_t n_domains = ontology.domains.size();
  if (n_domains == 0) throw GoalSamplingError("ontology has no domains");
  const bool any_requestable =
      std::any_of(ontology.domains.begin(), ontology.domains.end(),
                  [](const DomainSpec& d) { return !d.requestable.empty(); });

  for (int attempt = 0; attempt < config.max_goal_tries; ++attempt) {
    const std::size_t max_k = std::min(config.max_goal_domains, n_domains);
    const std::size_t min_k = std::clamp<std::size_t>(config.min_goal_domains, 1, max_k);
    const std::size_t k = min_k + uniform_index(rng, max_k - min_k + 1);
    std::vector<std::size_t> order(n_domains);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < k; ++i)
      std::swap(order[i], order[i + uniform_index(rng, n_domains - i)]);

    UserGoal goal;
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) {
      const auto& spec = ontology.domains[order[i]];
      DomainGoal g;
      g.domain = order[i];
      std::vector<std::string> stated;
      for (const auto& slot : spec.informable) {
        if (bernoulli(rng, config.dontcare_prob)) {
          g.constraints[slot.name] = std::string(kDontCare);
        } else {
          g.constraints[slot.name] = slot.values[uniform_index(rng, slot.values.size())];
          stated.push_back(slot.name);
        }
      }
      if (stated.empty() && !spec.informable.empty()) {
        const auto& slot = spec.informable.front();
        g.constraints[slot.name] = slot.values[uniform_index(rng, slot.values.size())];
        stated.push_back(slot.name);
      }
      for (const auto& s : stated)
        if (bernoulli(rng, config.volunteer_prob)) g.volunteered.push_back(s);
      if (g.volunteered.empty() && !stated.empty()) g.volunteered.push_back(stated.front());

      if (spec.has_database && db.query(g.domain, g.constraints).empty()) ok = false;

      for (const auto& r : spec.requestable)
        if (bernoulli(rng, config.request_prob)) g.requests.push_back(r);
      if (g.requests.empty() && !spec.requestable.empty())
        g.requests.push_back(spec.requestable[uniform_index(rng, spec.requestable.size())]);

      g.wants_booking = spec.bookable && (!spec.has_database || bernoulli(rng, config.booking_prob));
      if (g.wants_booking)
        for (const auto& b : spec.booking)
          g.booking[b.name] = b.values[uniform_index(rng, b.values.size())];
      goal.domains.push_back(std::move(g));
    }
    if (ok && any_requestable && goal.request_count() == 0) ok = false;
    if (ok) return goal;
  }
  throw GoalSamplingError("no satisfiable goal after " + std::to_string(config.max_goal_tries) +
                          " tries; database is degenerate");
}

void Agenda::push(DialogAct act) {
  remove(act);
  items_.push_back(std::move(act));
}

std::optional<DialogAct> Agenda::pop() {
  if (items_.empty()) return std::nullopt;
  auto act = std::move(items_.back());
  items_.pop_back();
  return act;
}

bool Agenda::remove(const DialogAct& act) {
  const auto it = std::find(items_.begin(), items_.end(), act);
  if (it == items_.end()) return false;
  items_.erase(it);
  return true;
}

Agenda build_agenda(const UserGoal& goal, const Ontology& ontology) {
  std::vector<DialogAct> pop_order;
  for (const auto& g : goal.domains) {
    const auto& name = ontology.domains[g.domain].name;
    for (const auto& s : g.volunteered) pop_order.push_back(make_inform(name, s, g.constraints.at(s)));
    for (const auto& r : g.requests) pop_order.push_back(make_request(name, r));
    if (g.wants_booking) {
      for (const auto& [slot, value] : g.booking) pop_order.push_back(make_inform(name, slot, value));
      pop_order.push_back(make_domain_act(Intent::kBook, name));
    }
  }
  pop_order.push_back(make_general_act(Intent::kBye));

  Agenda agenda;
  for (auto it = pop_order.rbegin(); it != pop_order.rend(); ++it) agenda.push(*it);
  return agenda;
}

GoalReport evaluate_goal(const UserGoal& goal, const EpisodeLog& log) {
  // (domain, slot) -> answered correctly at least once
  std::map<std::pair<std::string, std::string>, bool> informed;
  std::set<std::string> booked_domains;
  for (const auto& rec : log.turns) {
    if (rec.actor != "system" || rec.acts.empty()) continue;
    const auto& act = rec.acts.front();
    if (rec.inform_correct) {
      auto& ok = informed[{act.domain, *act.slot}];
      ok = ok || *rec.inform_correct;
    }
    if (rec.booking_accepted.value_or(false)) booked_domains.insert(act.domain);
  }

  GoalReport report;
  std::size_t correct = 0;
  for (const auto& [key, ok] : informed) correct += ok;
  report.precision = informed.empty() ? 0.0 : static_cast<double>(correct) / informed.size();

  // Only goal request slots can be answered correctly, so the correct pairs
  // are a subset of the goal's requests.
  const auto requests = goal.request_count();
  report.recall = requests == 0 ? 0.0 : static_cast<double>(correct) / requests;
  report.f1 = (report.precision + report.recall) > 0.0
                  ? 2.0 * report.precision * report.recall / (report.precision + report.recall)
                  : 0.0;

  report.wanted_bookings = goal.booking_count();
  report.booked_fraction =
      report.wanted_bookings == 0
          ? 0.0
          : static_cast<double>(std::min(booked_domains.size(), report.wanted_bookings)) /
                report.wanted_bookings;
  report.success = requests == correct && booked_domains.size() >= report.wanted_bookings;
  return report;
}

void write_episode_log(std::ostream& out, const UserGoal& goal, const EpisodeLog& log,
                       const Ontology& ontology) {
  using nlohmann::json;
  json header;
  header["type"] = "goal";
  for (const auto& g : goal.domains) {
    json jg;
    jg["domain"] = ontology.domains[g.domain].name;
    jg["constraints"] = g.constraints;
    jg["volunteered"] = g.volunteered;
    jg["requests"] = g.requests;
    jg["wants_booking"] = g.wants_booking;
    jg["booking"] = g.booking;
    header["domains"].push_back(std::move(jg));
  }
  out << header.dump() << '\n';
  for (const auto& rec : log.turns) {
    json j;
    j["type"] = "turn";
    j["turn"] = rec.turn;
    j["actor"] = rec.actor;
    j["reward"] = rec.reward;
    j["acts"] = json::array();
    for (const auto& a : rec.acts) j["acts"].push_back(to_string(a));
    if (rec.inform_correct) j["inform_correct"] = *rec.inform_correct;
    if (rec.booking_accepted) j["booking_accepted"] = *rec.booking_accepted;
    out << j.dump() << '\n';
  }
}

DialogEnv::DialogEnv(std::shared_ptr<const EntityDatabase> db, SimulatorConfig config)
    : db_(std::move(db)), config_(config), actions_(enumerate_actions(db_->ontology())) {
  if (config_.max_turns < 1) throw std::invalid_argument("max_turns must be >= 1");
  if (config_.max_user_acts < 1) throw std::invalid_argument("max_user_acts must be >= 1");
}

DialogEnv::ResetResult DialogEnv::reset(Rng& rng) {
  goal_ = sample_goal(*db_, rng, config_);
  return start();
}

DialogEnv::ResetResult DialogEnv::reset_with_goal(UserGoal goal) {
  goal_ = std::move(goal);
  return start();
}

DialogEnv::ResetResult DialogEnv::start() {
  const auto& ontology = db_->ontology();
  agenda_ = build_agenda(goal_, ontology);
  max_agenda_ = agenda_.size();
  state_ = initial_state(*db_);
  progress_.assign(ontology.domains.size(), DomainProgress{});
  log_ = {};
  done_ = false;
  return_ = 0.0;

  std::vector<DialogAct> acts;
  fill_from_agenda(acts, /*opening=*/true);
  note_user_acts(acts);
  state_ = track_state(state_, acts, *db_);
  log_.turns.push_back(TurnRecord{.turn = 0, .actor = "user", .acts = acts});
  return {acts, state_};
}

DomainGoal* DialogEnv::goal_for(std::size_t domain) {
  for (auto& g : goal_.domains)
    if (g.domain == domain) return &g;
  return nullptr;
}

bool DialogEnv::consistent(const DomainGoal& g, std::optional<std::size_t> entity) const {
  if (db_->ontology().domains[g.domain].has_database)
    return entity.has_value() && db_->matches(g.domain, *entity, g.constraints);
  const auto& told = state_.domains[g.domain].constraints;
  for (const auto& [slot, value] : g.constraints) {
    if (value == kDontCare) continue;
    const auto it = told.find(slot);
    if (it == told.end() || it->second != value) return false;
  }
  return true;
}

bool DialogEnv::booking_details_match(const DomainGoal& g) const {
  const auto& told = state_.domains[g.domain].booking_info;
  for (const auto& [slot, value] : g.booking) {
    const auto it = told.find(slot);
    if (it == told.end() || it->second != value) return false;
  }
  return true;
}

std::optional<DialogAct> DialogEnv::reveal_violation(const DomainGoal& g,
                                                     std::optional<std::size_t> entity) const {
  const auto& spec = db_->ontology().domains[g.domain];
  const auto& told = state_.domains[g.domain].constraints;
  for (const auto& slot : spec.informable) {
    const auto& want = g.constraints.at(slot.name);
    if (want == kDontCare) continue;
    std::string have;
    if (spec.has_database && entity) {
      have = db_->entities(g.domain)[*entity].slots.at(slot.name);
    } else if (const auto it = told.find(slot.name); it != told.end()) {
      have = it->second;
    }
    if (have != want) return make_inform(spec.name, slot.name, want);
  }
  return std::nullopt;
}

bool DialogEnv::has_pending() const {
  for (const auto& g : goal_.domains) {
    const auto& p = progress_[g.domain];
    for (const auto& r : p.emitted_requests)
      if (!p.answers.contains(r)) return true;
    if (p.booking_signaled && !p.booked && !p.misbooked) return true;
  }
  return false;
}

bool DialogEnv::goal_complete() const {
  for (const auto& g : goal_.domains) {
    const auto& p = progress_[g.domain];
    for (const auto& r : g.requests)
      if (!p.answers.contains(r)) return false;
    if (g.wants_booking && !p.booked) return false;
  }
  return true;
}

bool DialogEnv::obsolete(const DialogAct& act) const {
  const auto d = db_->ontology().find_domain(act.domain);
  if (!d) return false;
  const auto& ds = state_.domains[*d];
  const auto& p = progress_[*d];
  switch (act.intent) {
    case Intent::kInform: {
      const auto it = ds.constraints.find(*act.slot);
      if (it != ds.constraints.end() && it->second == *act.value) return true;
      const auto b = ds.booking_info.find(*act.slot);
      return b != ds.booking_info.end() && b->second == *act.value;
    }
    case Intent::kRequest:
      return p.answers.contains(*act.slot);
    case Intent::kBook:
      return p.booked || p.misbooked;
    default:
      return false;
  }
}

void DialogEnv::note_user_acts(const std::vector<DialogAct>& acts) {
  const auto& ontology = db_->ontology();
  for (const auto& act : acts) {
    const auto d = ontology.find_domain(act.domain);
    if (!d) continue;
    auto& p = progress_[*d];
    switch (act.intent) {
      case Intent::kRequest:
        p.emitted_requests.insert(*act.slot);
        break;
      case Intent::kBook:
        p.booking_signaled = true;
        break;
      case Intent::kInform:
        if (ontology.domains[*d].informable_index(*act.slot)) {
          std::erase(p.told_order, *act.slot);
          if (*act.value != kDontCare) p.told_order.push_back(*act.slot);
        }
        break;
      default:
        break;
    }
  }
}

std::vector<DialogAct> DialogEnv::react(const ActionTemplate& action, const ExecutedAction& exec,
                                        TurnRecord& record) {
  std::vector<DialogAct> out;
  if (action.domain == kGeneralDomain) return out;
  const auto& ontology = db_->ontology();
  const std::size_t d = *ontology.find_domain(action.domain);
  const auto& spec = ontology.domains[d];
  DomainGoal* g = goal_for(d);
  auto& p = progress_[d];

  switch (action.kind) {
    case TemplateKind::kRequest: {
      if (!g) break;
      const auto& value = g->constraints.at(action.slot);
      agenda_.remove(make_inform(spec.name, action.slot, value));
      out.push_back(make_inform(spec.name, action.slot, value));
      break;
    }
    case TemplateKind::kInform: {
      const bool wanted = g && contains(g->requests, action.slot);
      const bool ok = wanted && consistent(*g, exec.entity);
      record.inform_correct = ok;
      if (!wanted) break;
      if (ok) {
        p.answers[action.slot] = exec.system_acts.front().value.value_or("");
        agenda_.remove(make_request(spec.name, action.slot));
      } else if (exec.entity) {
        if (auto v = reveal_violation(*g, exec.entity)) out.push_back(std::move(*v));
        if (p.emitted_requests.contains(action.slot)) out.push_back(make_request(spec.name, action.slot));
      }
      break;
    }
    case TemplateKind::kOfferBooking: {
      if (!g || !g->wants_booking || p.booked || p.misbooked) break;
      if (consistent(*g, exec.entity)) {
        if (!p.booking_signaled) {
          agenda_.remove(make_domain_act(Intent::kBook, spec.name));
          out.push_back(make_domain_act(Intent::kBook, spec.name));
        }
      } else if (auto v = reveal_violation(*g, exec.entity)) {
        out.push_back(std::move(*v));
      }
      break;
    }
    case TemplateKind::kBook: {
      if (!g || !g->wants_booking || p.booked || p.misbooked) break;
      if (spec.has_database && !exec.entity) {
        record.booking_accepted = false;
        if (auto v = reveal_violation(*g, exec.entity)) out.push_back(std::move(*v));
        break;
      }
      const bool ok = consistent(*g, exec.entity) && booking_details_match(*g);
      record.booking_accepted = ok;
      (ok ? p.booked : p.misbooked) = true;
      state_.domains[d].booked = true;
      state_.domains[d].booking_requested = false;
      agenda_.remove(make_domain_act(Intent::kBook, spec.name));
      break;
    }
    case TemplateKind::kNoOffer: {
      if (!g || !spec.has_database || state_.domains[d].db_count != 0 || p.told_order.empty()) break;
      const auto slot = p.told_order.back();
      g->constraints[slot] = std::string(kDontCare);
      out.push_back(make_inform(spec.name, slot, std::string(kDontCare)));
      break;
    }
    default:
      break;
  }
  return out;
}

void DialogEnv::fill_from_agenda(std::vector<DialogAct>& acts, bool opening) {
  if (has_pending()) return;
  std::optional<std::string> domain;
  if (!acts.empty()) domain = acts.front().domain;
  while (acts.size() < config_.max_user_acts && !agenda_.empty()) {
    const DialogAct& top = *agenda_.top();
    if (obsolete(top)) {
      agenda_.pop();
      continue;
    }
    if (top.intent == Intent::kBye) {
      if (goal_complete()) acts.push_back(*agenda_.pop());
      break;
    }
    if (domain && top.domain != *domain) break;
    domain = top.domain;
    const bool is_book = top.intent == Intent::kBook;
    if (is_book && opening) break;
    acts.push_back(*agenda_.pop());
    if (is_book) break;
  }
}

EnvStepResult DialogEnv::step(std::size_t action) {
  if (done_) throw std::logic_error("step() called on a finished episode");
  if (action >= actions_.size()) throw std::out_of_range("action index out of range");

  state_.turn += 1;
  const auto& tmpl = actions_[action];
  TurnRecord sys{.turn = state_.turn, .actor = "system"};
  const auto exec = execute_action(state_, action, actions_, *db_);
  sys.acts = exec.system_acts;

  EnvStepResult result;
  result.reward = config_.step_penalty();

  if (tmpl.kind == TemplateKind::kBye) {
    result.done = true;
    result.success = false;
  } else {
    auto acts = react(tmpl, exec, sys);
    if (goal_complete()) {
      acts = {make_general_act(Intent::kBye)};
      result.done = true;
      result.success = true;
    } else {
      fill_from_agenda(acts);
      if (state_.turn >= config_.max_turns) {
        result.done = true;
        result.success = false;
      }
    }
    note_user_acts(acts);
    state_ = track_state(state_, acts, *db_);
    result.user_acts = acts;
  }

  if (result.done) {
    result.reward += *result.success ? config_.success_reward() : config_.failure_reward();
    state_.terminated = true;
    done_ = true;
  }
  sys.reward = result.reward;
  return_ += result.reward;
  log_.turns.push_back(std::move(sys));
  if (!result.user_acts.empty() || !result.done)
    log_.turns.push_back(TurnRecord{.turn = state_.turn, .actor = "user", .acts = result.user_acts});
  return result;
}

}  // namespace dqfd
