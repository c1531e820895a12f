#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dqfd {

enum class Intent {
  kInform,
  kRequest,
  kOfferBooking,
  kBook,
  kNoOffer,
  kGreet,
  kBye,
  kReqMore,
};

inline constexpr std::size_t kIntentCount = 8;

std::string_view intent_name(Intent intent);
std::optional<Intent> parse_intent(std::string_view name);  // case-insensitive

// One unit of dialog meaning. General acts (Greet, Bye, ReqMore) use the
// "general" domain.
struct DialogAct {
  Intent intent = Intent::kReqMore;
  std::string domain;
  std::optional<std::string> slot;
  std::optional<std::string> value;

  friend bool operator==(const DialogAct&, const DialogAct&) = default;
};

// Inform carries slot+value, Request carries a slot only, domain-level and
// general acts carry neither.
bool is_well_formed(const DialogAct& act);

DialogAct make_inform(std::string domain, std::string slot, std::string value);
DialogAct make_request(std::string domain, std::string slot);
DialogAct make_domain_act(Intent intent, std::string domain);
DialogAct make_general_act(Intent intent);

// "Inform(hotel, area=north)", "Request(hotel, phone)", "Bye()".
std::string to_string(const DialogAct& act);
std::string to_string(const std::vector<DialogAct>& acts);

// Parses one act in the REPL grammar `intent [domain [slot[=value]]]`, e.g.
// `inform hotel area=north`, `request hotel phone`, `book hotel`, `bye`.
// Returns nullopt on anything that does not yield a well-formed act.
std::optional<DialogAct> parse_act_line(std::string_view line);

}  // namespace dqfd
