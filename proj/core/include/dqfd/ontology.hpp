#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dqfd {

inline constexpr std::string_view kDontCare = "dontcare";
inline constexpr std::string_view kGeneralDomain = "general";

struct SlotSpec {
  std::string name;
  std::vector<std::string> values;

  bool has_value(std::string_view v) const;
};

struct DomainSpec {
  std::string name;
  std::vector<SlotSpec> informable;
  std::vector<std::string> requestable;
  bool bookable = false;
  bool has_database = false;
  std::vector<SlotSpec> booking;

  std::optional<std::size_t> informable_index(std::string_view slot) const;
  std::optional<std::size_t> requestable_index(std::string_view slot) const;
  std::optional<std::size_t> booking_index(std::string_view slot) const;
};

struct Ontology {
  std::vector<DomainSpec> domains;

  std::optional<std::size_t> find_domain(std::string_view name) const;
  const DomainSpec& domain(std::string_view name) const;  // throws
};

class OntologyError : public std::runtime_error {
 public:
  enum class Kind {
    kSyntax,
    kUnknownKey,
    kNoDomains,
    kDuplicateDomain,
    kDuplicateSlot,
    kDuplicateValue,
    kEmptyValueList,
    kReservedName,
  };

  OntologyError(Kind kind, int line, const std::string& what);

  Kind kind() const { return kind_; }
  // 1-based line of the offending entry, 0 when not tied to a line.
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

// Parses the INI-like ontology format:
//
//   [hotel]
//   database = true
//   bookable = true
//   inform.area = north, south, centre
//   request = address, phone, postcode
//   book.people = 1, 2, 3, 4
//
// Blank lines and lines starting with '#' are ignored. Domain and slot names
// must be unique, value lists non-empty, and "dontcare"/"general" are
// reserved.
Ontology load_ontology(std::string_view text);
Ontology load_ontology_file(const std::string& path);

// Validates a programmatically built ontology; zero domains is allowed here.
void validate_ontology(const Ontology& ontology);

// The shipped three-domain desk ontology (identical to data/ontology.default).
std::string_view default_ontology_text();

std::string serialize_ontology(const Ontology& ontology);

}  // namespace dqfd
