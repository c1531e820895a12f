#include "dqfd/dialog_act.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "dqfd/ontology.hpp"

namespace dqfd {

namespace {

constexpr std::array<std::string_view, kIntentCount> kIntentNames = {
    "Inform", "Request", "OfferBooking", "Book",
    "NoOffer", "Greet",  "Bye",          "ReqMore"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

bool is_general(Intent i) {
  return i == Intent::kGreet || i == Intent::kBye || i == Intent::kReqMore;
}

}  // namespace

std::string_view intent_name(Intent intent) {
  return kIntentNames[static_cast<std::size_t>(intent)];
}

std::optional<Intent> parse_intent(std::string_view name) {
  for (std::size_t i = 0; i < kIntentNames.size(); ++i)
    if (iequals(name, kIntentNames[i])) return static_cast<Intent>(i);
  return std::nullopt;
}

bool is_well_formed(const DialogAct& act) {
  if (act.domain.empty()) return false;
  switch (act.intent) {
    case Intent::kInform:
      return act.slot.has_value() && act.value.has_value() &&
             act.domain != kGeneralDomain;
    case Intent::kRequest:
      return act.slot.has_value() && !act.value.has_value() &&
             act.domain != kGeneralDomain;
    case Intent::kOfferBooking:
    case Intent::kBook:
    case Intent::kNoOffer:
      return !act.slot && !act.value && act.domain != kGeneralDomain;
    case Intent::kGreet:
    case Intent::kBye:
    case Intent::kReqMore:
      return !act.slot && !act.value && act.domain == kGeneralDomain;
  }
  return false;
}

DialogAct make_inform(std::string domain, std::string slot, std::string value) {
  return DialogAct{Intent::kInform, std::move(domain), std::move(slot),
                   std::move(value)};
}

DialogAct make_request(std::string domain, std::string slot) {
  return DialogAct{Intent::kRequest, std::move(domain), std::move(slot),
                   std::nullopt};
}

DialogAct make_domain_act(Intent intent, std::string domain) {
  return DialogAct{intent, std::move(domain), std::nullopt, std::nullopt};
}

DialogAct make_general_act(Intent intent) {
  return DialogAct{intent, std::string(kGeneralDomain), std::nullopt,
                   std::nullopt};
}

std::string to_string(const DialogAct& act) {
  std::string out(intent_name(act.intent));
  out += '(';
  if (act.domain != kGeneralDomain) {
    out += act.domain;
    if (act.slot) {
      out += ", ";
      out += *act.slot;
      if (act.value) {
        out += '=';
        out += *act.value;
      }
    }
  }
  out += ')';
  return out;
}

std::string to_string(const std::vector<DialogAct>& acts) {
  std::string out;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    if (i) out += ' ';
    out += to_string(acts[i]);
  }
  return out;
}

std::optional<DialogAct> parse_act_line(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::vector<std::string> tokens;
  for (std::string tok; in >> tok;) tokens.push_back(tok);
  if (tokens.empty()) return std::nullopt;

  const auto intent = parse_intent(tokens[0]);
  if (!intent) return std::nullopt;

  DialogAct act;
  act.intent = *intent;
  if (is_general(*intent)) {
    if (tokens.size() != 1) return std::nullopt;
    act.domain = std::string(kGeneralDomain);
  } else {
    if (tokens.size() < 2) return std::nullopt;
    act.domain = tokens[1];
    if (tokens.size() > 3) return std::nullopt;
    if (tokens.size() == 3) {
      const auto& sv = tokens[2];
      const auto eq = sv.find('=');
      if (eq == std::string::npos) {
        act.slot = sv;
      } else {
        act.slot = sv.substr(0, eq);
        act.value = sv.substr(eq + 1);
        if (act.slot->empty() || act.value->empty()) return std::nullopt;
      }
    }
  }
  if (!is_well_formed(act)) return std::nullopt;
  return act;
}

}  // namespace dqfd
