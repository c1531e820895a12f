#include "dqfd_cli/chat.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "dqfd/agent.hpp"
#include "dqfd/dialog_act.hpp"

namespace dqfd::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::string join(const Constraints& c) {
  std::string out;
  for (const auto& [k, v] : c) out += (out.empty() ? "" : " ") + k + "=" + v;
  return out;
}

}  // namespace

ChatSession::ChatSession(std::shared_ptr<const EntityDatabase> db, QNetwork net)
    : db_(std::move(db)),
      net_(std::move(net)),
      actions_(enumerate_actions(db_->ontology())),
      layout_(db_->ontology()),
      state_(initial_state(*db_)) {
  if (net_.shape().input != layout_.size() || net_.shape().actions != actions_.size())
    throw std::invalid_argument("chat: network shape does not match the ontology");
}

std::string ChatSession::help() {
  return "Type user dialog acts, several per line separated by ';':\n"
         "  inform <domain> <slot>=<value>   e.g. inform hotel area=north\n"
         "  request <domain> <slot>          e.g. request hotel phone\n"
         "  book <domain>                    e.g. book restaurant\n"
         "  greet | reqmore | bye\n"
         "Commands: state (tracked state), q (top-5 Q-values), help, quit\n";
}

std::vector<std::pair<std::string, double>> ChatSession::top_actions(std::size_t k) const {
  const auto q = net_.forward(featurize(state_, db_->ontology(), layout_));
  std::vector<std::size_t> order(actions_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return q(a) > q(b); });
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i)
    out.emplace_back(to_string(actions_[order[i]]), q(order[i]));
  return out;
}

std::string ChatSession::describe_state() const {
  const auto& ontology = db_->ontology();
  std::ostringstream out;
  out << "turn " << state_.turn;
  if (state_.active_domain) out << ", active domain " << ontology.domains[*state_.active_domain].name;
  out << '\n';
  for (std::size_t d = 0; d < state_.domains.size(); ++d) {
    const auto& ds = state_.domains[d];
    out << "  " << ontology.domains[d].name << ": constraints {" << join(ds.constraints) << "}";
    if (ontology.domains[d].has_database) out << " matches " << ds.db_count;
    if (ds.offered_entity) out << " offered " << db_->entities(d)[*ds.offered_entity].name;
    if (!ds.booking_info.empty()) out << " booking {" << join(ds.booking_info) << "}";
    if (!ds.requested.empty()) {
      out << " requested";
      for (const auto& r : ds.requested) out << ' ' << r;
    }
    if (ds.booking_requested) out << " [booking requested]";
    if (ds.booked) out << " [booked]";
    out << '\n';
  }
  return out.str();
}

std::string ChatSession::goal_summary() const {
  const auto& ontology = db_->ontology();
  std::ostringstream out;
  out << "dialog summary after " << state_.turn << " system turns:\n";
  bool any = false;
  for (std::size_t d = 0; d < state_.domains.size(); ++d) {
    const auto& ds = state_.domains[d];
    if (ds.constraints.empty() && ds.booking_info.empty() && ds.requested.empty() && !ds.booked &&
        !ds.booking_requested)
      continue;
    any = true;
    out << "  " << ontology.domains[d].name << ": {" << join(ds.constraints) << "}";
    if (ds.booked) {
      out << " booked";
      if (ds.offered_entity) out << ' ' << db_->entities(d)[*ds.offered_entity].name;
    } else if (ds.booking_requested) {
      out << " booking still pending";
    }
    if (!ds.requested.empty()) {
      out << "; unanswered:";
      for (const auto& r : ds.requested) out << ' ' << r;
    }
    out << '\n';
  }
  if (!any) out << "  (no goal expressed)\n";
  return out.str();
}

std::string ChatSession::system_turn() {
  const auto x = featurize(state_, db_->ontology(), layout_);
  const std::size_t a = greedy_action(net_.forward(x));
  const auto& tmpl = actions_[a];
  state_.turn += 1;
  const auto exec = execute_action(state_, a, actions_, *db_);
  std::ostringstream out;
  out << "system: ";
  if (exec.system_acts.empty()) out << "(" << to_string(tmpl) << " has nothing to say)";
  else out << to_string(exec.system_acts);
  if (tmpl.domain != kGeneralDomain) {
    const std::size_t d = *db_->ontology().find_domain(tmpl.domain);
    if (exec.entity) out << "  [" << db_->entities(d)[*exec.entity].name << "]";
    if (tmpl.kind == TemplateKind::kBook &&
        (exec.entity || !db_->ontology().domains[d].has_database)) {
      state_.domains[d].booked = true;
      state_.domains[d].booking_requested = false;
      out << "  (booked)";
    }
  }
  out << '\n';
  if (tmpl.kind == TemplateKind::kBye) {
    finished_ = true;
    state_.terminated = true;
    out << goal_summary();
  }
  return out.str();
}

std::string ChatSession::handle(std::string_view raw) {
  const std::string line = trim(raw);
  if (line.empty()) return {};
  if (line == "quit" || line == "exit") {
    finished_ = true;
    return "session closed\n";
  }
  if (line == "help") return help();
  if (line == "state") return describe_state();
  if (line == "q") {
    std::ostringstream out;
    for (const auto& [name, value] : top_actions(5)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%10.4f  ", value);
      out << buf << name << '\n';
    }
    return out.str();
  }
  if (finished_) return "the dialog has ended; type quit to leave\n";

  std::vector<DialogAct> acts;
  for (const auto& part : split(line, ';')) {
    if (part.empty()) continue;
    auto act = parse_act_line(part);
    if (!act) return "could not parse '" + part + "'; type help for the act syntax\n";
    acts.push_back(std::move(*act));
  }
  if (acts.empty()) return {};

  const int ignored_before = state_.ignored_acts;
  state_ = track_state(state_, acts, *db_);
  std::string out;
  if (state_.ignored_acts > ignored_before)
    out += "note: " + std::to_string(state_.ignored_acts - ignored_before) +
           " act(s) name an unknown domain, slot or value and were ignored\n";
  if (state_.terminated) {
    finished_ = true;
    return out + goal_summary();
  }
  return out + system_turn();
}

}  // namespace dqfd::cli
