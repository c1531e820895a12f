#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dqfd/ontology.hpp"

namespace dqfd {

using Constraints = std::map<std::string, std::string>;

struct Entity {
  std::string name;
  std::map<std::string, std::string> slots;  // informable + requestable

  friend bool operator==(const Entity&, const Entity&) = default;
};

class DatabaseError : public std::runtime_error {
 public:
  enum class Kind { kUnknownDomain, kNotDatabaseBacked, kUnknownSlot, kUnknownValue, kFormat };
  DatabaseError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Synthetic entity tables for the database-backed domains. The database keeps
// its own copy of the ontology so that it can validate queries.
class EntityDatabase {
 public:
  static constexpr std::size_t kDefaultEntitiesPerDomain = 12;

  EntityDatabase(Ontology ontology, std::vector<std::vector<Entity>> tables);

  // Uniformly samples informable values; requestable values are synthetic
  // strings unique to each entity.
  static EntityDatabase generate(const Ontology& ontology, std::uint64_t seed,
                                 std::size_t per_domain = kDefaultEntitiesPerDomain);

  const Ontology& ontology() const { return ontology_; }

  // Entities of domain index `d` (empty for domains without a database).
  const std::vector<Entity>& entities(std::size_t d) const { return tables_[d]; }

  // Indices of the entities matching every constraint; "dontcare" matches
  // everything. Throws DatabaseError on unknown domain/slot/value.
  std::vector<std::size_t> query(std::string_view domain,
                                 const Constraints& constraints) const;
  std::vector<std::size_t> query(std::size_t domain,
                                 const Constraints& constraints) const;

  bool matches(std::size_t domain, std::size_t entity,
               const Constraints& constraints) const;

  // Line-delimited dump: `domain<TAB>name<TAB>slot=value<TAB>...`.
  void dump(std::ostream& out) const;
  static EntityDatabase load(std::istream& in, const Ontology& ontology);

 private:
  void check_constraints(std::size_t domain, const Constraints& constraints) const;

  Ontology ontology_;
  std::vector<std::vector<Entity>> tables_;
};

}  // namespace dqfd
