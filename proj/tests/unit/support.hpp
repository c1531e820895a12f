#pragma once

#include <memory>
#include <string>

#include "dqfd/database.hpp"
#include "dqfd/ontology.hpp"
#include "dqfd/user_simulator.hpp"

namespace dqfd::test {

inline const Ontology& desk_ontology() {
  static const Ontology ontology = load_ontology(default_ontology_text());
  return ontology;
}

inline std::shared_ptr<const EntityDatabase> desk_db(std::uint64_t seed = 7) {
  return std::make_shared<const EntityDatabase>(EntityDatabase::generate(desk_ontology(), seed));
}

inline std::size_t domain_index(const std::string& name) {
  return *desk_ontology().find_domain(name);
}

}  // namespace dqfd::test
