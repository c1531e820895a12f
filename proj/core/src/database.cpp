#include "dqfd/database.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "dqfd/random.hpp"

namespace dqfd {

namespace {

constexpr std::array<std::string_view, 8> kStreets = {
    "mill road", "regent street", "hills road", "trumpington street",
    "king street", "castle hill", "bridge street", "station road"};

std::string digits(Rng& rng, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += static_cast<char>('0' + uniform_index(rng, 10));
  return s;
}

std::string synth_value(std::string_view slot, std::size_t entity, Rng& rng) {
  if (slot == "phone") return "01223" + digits(rng, 6);
  if (slot == "postcode")
    return "cb" + digits(rng, 1) + digits(rng, 1) +
           static_cast<char>('a' + uniform_index(rng, 26)) +
           static_cast<char>('a' + uniform_index(rng, 26));
  if (slot == "internet" || slot == "parking") return bernoulli(rng, 0.5) ? "yes" : "no";
  if (slot == "openhours")
    return std::to_string(7 + uniform_index(rng, 5)) + ":00-" +
           std::to_string(20 + uniform_index(rng, 4)) + ":00";
  if (slot == "address")
    return std::to_string(1 + uniform_index(rng, 98)) + " " +
           std::string(kStreets[uniform_index(rng, kStreets.size())]);
  return std::string(slot) + "-" + std::to_string(entity) + "-" + digits(rng, 3);
}

}  // namespace

EntityDatabase::EntityDatabase(Ontology ontology,
                               std::vector<std::vector<Entity>> tables)
    : ontology_(std::move(ontology)), tables_(std::move(tables)) {
  if (tables_.size() != ontology_.domains.size())
    throw DatabaseError(DatabaseError::Kind::kFormat,
                        "table count does not match domain count");
  for (std::size_t d = 0; d < tables_.size(); ++d) {
    const auto& spec = ontology_.domains[d];
    std::set<std::string> names;
    for (const auto& e : tables_[d]) {
      if (!names.insert(e.name).second)
        throw DatabaseError(DatabaseError::Kind::kFormat,
                            "duplicate entity name '" + e.name + "'");
      for (const auto& slot : spec.informable) {
        const auto it = e.slots.find(slot.name);
        if (it == e.slots.end() || !slot.has_value(it->second))
          throw DatabaseError(DatabaseError::Kind::kUnknownValue,
                              "entity '" + e.name + "' has bad value for '" +
                                  slot.name + "'");
      }
    }
    if (!spec.has_database && !tables_[d].empty())
      throw DatabaseError(DatabaseError::Kind::kNotDatabaseBacked,
                          "entities given for domain without database");
  }
}

EntityDatabase EntityDatabase::generate(const Ontology& ontology,
                                        std::uint64_t seed,
                                        std::size_t per_domain) {
  Rng rng = derive_rng(seed, 0xdb);
  std::vector<std::vector<Entity>> tables(ontology.domains.size());
  for (std::size_t d = 0; d < ontology.domains.size(); ++d) {
    const auto& spec = ontology.domains[d];
    if (!spec.has_database) continue;
    for (std::size_t i = 0; i < per_domain; ++i) {
      Entity e;
      e.name = spec.name + "-" + std::to_string(i);
      for (const auto& slot : spec.informable)
        e.slots[slot.name] = slot.values[uniform_index(rng, slot.values.size())];
      for (const auto& slot : spec.requestable)
        e.slots[slot] = slot == "name" ? e.name : synth_value(slot, i, rng);
      tables[d].push_back(std::move(e));
    }
  }
  return EntityDatabase(ontology, std::move(tables));
}

void EntityDatabase::check_constraints(std::size_t domain,
                                       const Constraints& constraints) const {
  const auto& spec = ontology_.domains[domain];
  if (!spec.has_database)
    throw DatabaseError(DatabaseError::Kind::kNotDatabaseBacked,
                        "domain '" + spec.name + "' has no database");
  for (const auto& [slot, value] : constraints) {
    const auto idx = spec.informable_index(slot);
    if (!idx)
      throw DatabaseError(DatabaseError::Kind::kUnknownSlot,
                          "unknown slot '" + slot + "' in domain '" + spec.name + "'");
    if (value != kDontCare && !spec.informable[*idx].has_value(value))
      throw DatabaseError(DatabaseError::Kind::kUnknownValue,
                          "unknown value '" + value + "' for " + spec.name + "." + slot);
  }
}

std::vector<std::size_t> EntityDatabase::query(
    std::string_view domain, const Constraints& constraints) const {
  const auto d = ontology_.find_domain(domain);
  if (!d)
    throw DatabaseError(DatabaseError::Kind::kUnknownDomain,
                        "unknown domain '" + std::string(domain) + "'");
  return query(*d, constraints);
}

std::vector<std::size_t> EntityDatabase::query(
    std::size_t domain, const Constraints& constraints) const {
  if (domain >= tables_.size())
    throw DatabaseError(DatabaseError::Kind::kUnknownDomain, "domain index out of range");
  check_constraints(domain, constraints);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tables_[domain].size(); ++i)
    if (matches(domain, i, constraints)) out.push_back(i);
  return out;
}

bool EntityDatabase::matches(std::size_t domain, std::size_t entity,
                             const Constraints& constraints) const {
  const auto& e = tables_[domain][entity];
  for (const auto& [slot, value] : constraints) {
    if (value == kDontCare) continue;
    const auto it = e.slots.find(slot);
    if (it == e.slots.end() || it->second != value) return false;
  }
  return true;
}

void EntityDatabase::dump(std::ostream& out) const {
  for (std::size_t d = 0; d < tables_.size(); ++d) {
    for (const auto& e : tables_[d]) {
      out << ontology_.domains[d].name << '\t' << e.name;
      for (const auto& [slot, value] : e.slots) out << '\t' << slot << '=' << value;
      out << '\n';
    }
  }
}

EntityDatabase EntityDatabase::load(std::istream& in, const Ontology& ontology) {
  std::vector<std::vector<Entity>> tables(ontology.domains.size());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
    if (fields.size() < 2)
      throw DatabaseError(DatabaseError::Kind::kFormat,
                          "line " + std::to_string(line_no) + ": too few fields");
    const auto d = ontology.find_domain(fields[0]);
    if (!d)
      throw DatabaseError(DatabaseError::Kind::kUnknownDomain,
                          "line " + std::to_string(line_no) + ": unknown domain '" +
                              fields[0] + "'");
    Entity e;
    e.name = fields[1];
    for (std::size_t i = 2; i < fields.size(); ++i) {
      const auto eq = fields[i].find('=');
      if (eq == std::string::npos)
        throw DatabaseError(DatabaseError::Kind::kFormat,
                            "line " + std::to_string(line_no) + ": expected slot=value");
      e.slots[fields[i].substr(0, eq)] = fields[i].substr(eq + 1);
    }
    tables[*d].push_back(std::move(e));
  }
  return EntityDatabase(ontology, std::move(tables));
}

}  // namespace dqfd
