#include "dqfd/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace dqfd {

namespace {

constexpr std::string_view kDefaultOntology = R"(# Desk-scale three-domain ontology.
[hotel]
database = true
bookable = true
inform.area = north, south, centre
inform.price = cheap, moderate, expensive
inform.stars = 2, 3, 4
request = address, phone, postcode, name, internet, parking
book.people = 1, 2, 3, 4

[restaurant]
database = true
bookable = true
inform.food = italian, chinese, indian, british
inform.area = north, south, centre
inform.price = cheap, moderate, expensive
request = address, phone, postcode, name, signature, openhours
book.people = 1, 2, 3, 4

[taxi]
database = false
bookable = true
inform.leave = morning, afternoon, evening
inform.destination = station, airport, museum
book.people = 1, 2, 3, 4
)";

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '-' || c == ':';
  });
}

bool is_reserved(std::string_view s) {
  return s == kDontCare || s == kGeneralDomain;
}

bool parse_bool(std::string_view v, int line) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw OntologyError(OntologyError::Kind::kSyntax, line,
                      "expected boolean, got '" + std::string(v) + "'");
}

void check_values(const std::vector<std::string>& values, int line,
                  const std::string& where) {
  if (values.empty())
    throw OntologyError(OntologyError::Kind::kEmptyValueList, line,
                        "empty value list for " + where);
  std::set<std::string> seen;
  for (const auto& v : values) {
    if (is_reserved(v))
      throw OntologyError(OntologyError::Kind::kReservedName, line,
                          "reserved value '" + v + "' in " + where);
    if (!seen.insert(v).second)
      throw OntologyError(OntologyError::Kind::kDuplicateValue, line,
                          "duplicate value '" + v + "' in " + where);
  }
}

// Slot names share one namespace per domain across informable, requestable
// and booking slots.
void check_new_slot(std::set<std::string>& slots, const std::string& slot,
                    const std::string& domain, int line) {
  if (!is_identifier(slot))
    throw OntologyError(OntologyError::Kind::kSyntax, line,
                        "bad slot name '" + slot + "'");
  if (is_reserved(slot))
    throw OntologyError(OntologyError::Kind::kReservedName, line,
                        "reserved slot name '" + slot + "'");
  if (!slots.insert(slot).second)
    throw OntologyError(OntologyError::Kind::kDuplicateSlot, line,
                        "duplicate slot '" + slot + "' in domain '" + domain +
                            "'");
}

}  // namespace

bool SlotSpec::has_value(std::string_view v) const {
  return std::find(values.begin(), values.end(), v) != values.end();
}

std::optional<std::size_t> DomainSpec::informable_index(
    std::string_view slot) const {
  for (std::size_t i = 0; i < informable.size(); ++i)
    if (informable[i].name == slot) return i;
  return std::nullopt;
}

std::optional<std::size_t> DomainSpec::requestable_index(
    std::string_view slot) const {
  for (std::size_t i = 0; i < requestable.size(); ++i)
    if (requestable[i] == slot) return i;
  return std::nullopt;
}

std::optional<std::size_t> DomainSpec::booking_index(
    std::string_view slot) const {
  for (std::size_t i = 0; i < booking.size(); ++i)
    if (booking[i].name == slot) return i;
  return std::nullopt;
}

std::optional<std::size_t> Ontology::find_domain(std::string_view name) const {
  for (std::size_t i = 0; i < domains.size(); ++i)
    if (domains[i].name == name) return i;
  return std::nullopt;
}

const DomainSpec& Ontology::domain(std::string_view name) const {
  const auto idx = find_domain(name);
  if (!idx) throw std::out_of_range("unknown domain '" + std::string(name) + "'");
  return domains[*idx];
}

OntologyError::OntologyError(Kind kind, int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                  : what),
      kind_(kind),
      line_(line) {}

Ontology load_ontology(std::string_view text) {
  Ontology ontology;
  std::set<std::string> domain_names;
  std::set<std::string> slot_names;
  DomainSpec* current = nullptr;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw OntologyError(OntologyError::Kind::kSyntax, line_no,
                            "unterminated section header");
      auto name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!is_identifier(name))
        throw OntologyError(OntologyError::Kind::kSyntax, line_no,
                            "bad domain name '" + name + "'");
      if (is_reserved(name))
        throw OntologyError(OntologyError::Kind::kReservedName, line_no,
                            "reserved domain name '" + name + "'");
      if (!domain_names.insert(name).second)
        throw OntologyError(OntologyError::Kind::kDuplicateDomain, line_no,
                            "duplicate domain '" + name + "'");
      ontology.domains.push_back(DomainSpec{.name = name});
      current = &ontology.domains.back();
      slot_names.clear();
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw OntologyError(OntologyError::Kind::kSyntax, line_no,
                          "expected 'key = value'");
    if (current == nullptr)
      throw OntologyError(OntologyError::Kind::kSyntax, line_no,
                          "entry outside of a [domain] section");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));

    if (key == "database") {
      current->has_database = parse_bool(value, line_no);
    } else if (key == "bookable") {
      current->bookable = parse_bool(value, line_no);
    } else if (key == "request") {
      auto slots = split_list(value);
      if (slots.empty())
        throw OntologyError(OntologyError::Kind::kEmptyValueList, line_no,
                            "empty requestable list");
      for (auto& s : slots) {
        check_new_slot(slot_names, s, current->name, line_no);
        current->requestable.push_back(std::move(s));
      }
    } else if (key.starts_with("inform.") || key.starts_with("book.")) {
      const bool inform = key.starts_with("inform.");
      auto slot = key.substr(inform ? 7 : 5);
      check_new_slot(slot_names, slot, current->name, line_no);
      auto values = split_list(value);
      check_values(values, line_no, current->name + "." + slot);
      auto& target = inform ? current->informable : current->booking;
      target.push_back(SlotSpec{std::move(slot), std::move(values)});
    } else {
      throw OntologyError(OntologyError::Kind::kUnknownKey, line_no,
                          "unknown key '" + key + "'");
    }
  }

  if (ontology.domains.empty())
    throw OntologyError(OntologyError::Kind::kNoDomains, 0,
                        "ontology declares no domains");
  validate_ontology(ontology);
  return ontology;
}

Ontology load_ontology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ontology file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_ontology(ss.str());
}

void validate_ontology(const Ontology& ontology) {
  std::set<std::string> domain_names;
  for (const auto& d : ontology.domains) {
    if (!domain_names.insert(d.name).second)
      throw OntologyError(OntologyError::Kind::kDuplicateDomain, 0,
                          "duplicate domain '" + d.name + "'");
    if (is_reserved(d.name))
      throw OntologyError(OntologyError::Kind::kReservedName, 0,
                          "reserved domain name '" + d.name + "'");
    std::set<std::string> slots;
    for (const auto& s : d.informable) {
      check_new_slot(slots, s.name, d.name, 0);
      check_values(s.values, 0, d.name + "." + s.name);
    }
    for (const auto& s : d.requestable) check_new_slot(slots, s, d.name, 0);
    for (const auto& s : d.booking) {
      check_new_slot(slots, s.name, d.name, 0);
      check_values(s.values, 0, d.name + "." + s.name);
    }
  }
}

std::string_view default_ontology_text() { return kDefaultOntology; }

std::string serialize_ontology(const Ontology& ontology) {
  std::ostringstream out;
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += v[i];
    }
    return s;
  };
  for (std::size_t i = 0; i < ontology.domains.size(); ++i) {
    const auto& d = ontology.domains[i];
    if (i) out << '\n';
    out << '[' << d.name << "]\n";
    out << "database = " << (d.has_database ? "true" : "false") << '\n';
    out << "bookable = " << (d.bookable ? "true" : "false") << '\n';
    for (const auto& s : d.informable)
      out << "inform." << s.name << " = " << join(s.values) << '\n';
    if (!d.requestable.empty()) out << "request = " << join(d.requestable) << '\n';
    for (const auto& s : d.booking)
      out << "book." << s.name << " = " << join(s.values) << '\n';
  }
  return out.str();
}

}  // namespace dqfd
