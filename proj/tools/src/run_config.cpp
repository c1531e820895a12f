#include "dqfd_cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dqfd/trainer.hpp"

namespace dqfd::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

CliError bad(const std::string& message) { return CliError("BadConfig", kExitUsage, message); }

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw bad(key + " expects a non-negative integer, got '" + text + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw bad(key + " expects a number, got '" + text + "'");
  return v;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_u64("seeds", item));
  }
  return out;
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string> kRunKeys{"preset", "ontology",      "db_seed", "seeds",
                                        "demos",  "eval_episodes", "sr_floor"};

}  // namespace

std::string preset_name(Preset preset) { return preset == Preset::kDesk ? "desk" : "paper"; }

Preset parse_preset(const std::string& text) {
  if (text == "desk") return Preset::kDesk;
  if (text == "paper") return Preset::kPaper;
  throw bad("preset expects desk or paper, got '" + text + "'");
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys = kRunKeys;
  for (const auto& [k, v] : describe(AgentConfig{})) keys.push_back(k);
  return keys;
}

void apply_settings(RunConfig& c, const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [k, v] : kv)
    if (k == "preset") {
      c.preset = parse_preset(v);
      c.agent = c.preset == Preset::kDesk ? AgentConfig::desk() : AgentConfig::paper();
    }
  for (const auto& [k, v] : kv) {
    if (k == "preset") continue;
    if (k == "ontology") c.ontology = v.empty() ? std::nullopt : std::optional<std::filesystem::path>(v);
    else if (k == "db_seed") c.db_seed = parse_u64(k, v);
    else if (k == "seeds") c.seeds = parse_seeds(v);
    else if (k == "demos") c.demos = v.empty() ? std::nullopt : std::optional<std::filesystem::path>(v);
    else if (k == "eval_episodes") c.eval_episodes = parse_u64(k, v);
    else if (k == "sr_floor") c.sr_floor = parse_real(k, v);
    else {
      bool known = false;
      try {
        known = assign(c.agent, k, v);
      } catch (const std::invalid_argument& e) {
        throw bad(e.what());
      }
      if (!known) throw bad("unknown config key '" + k + "'");
    }
  }
}

std::vector<std::pair<std::string, std::string>> parse_settings(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw bad("config line " + std::to_string(n) + ": expected 'key = value'");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  apply_settings(c, parse_settings(text));
  return c;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "preset = " << preset_name(c.preset) << '\n';
  out << "ontology = " << (c.ontology ? c.ontology->string() : "") << '\n';
  out << "db_seed = " << c.db_seed << '\n';
  out << "seeds = ";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) out << (i ? "," : "") << c.seeds[i];
  out << '\n';
  out << "demos = " << (c.demos ? c.demos->string() : "") << '\n';
  out << "eval_episodes = " << c.eval_episodes << '\n';
  out << "sr_floor = " << shortest(c.sr_floor) << '\n';
  for (const auto& [k, v] : describe(c.agent)) out << k << " = " << v << '\n';
  return out.str();
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CliError("BadConfig", kExitUsage, "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate(const RunConfig& c) {
  if (c.ontology && !std::filesystem::exists(*c.ontology))
    throw bad("ontology file " + c.ontology->string() + " does not exist");
  if (c.demos && !std::filesystem::exists(*c.demos))
    throw bad("demo file " + c.demos->string() + " does not exist");
  try {
    c.agent.validate();
  } catch (const std::invalid_argument& e) {
    throw bad(e.what());
  }
}

Ontology load_run_ontology(const RunConfig& c) {
  try {
    return c.ontology ? load_ontology_file(c.ontology->string())
                      : load_ontology(default_ontology_text());
  } catch (const std::exception& e) {
    throw CliError("BadOntology", kExitRuntime, e.what());
  }
}

std::shared_ptr<const EntityDatabase> make_database(const RunConfig& c) {
  return std::make_shared<const EntityDatabase>(
      EntityDatabase::generate(load_run_ontology(c), c.db_seed));
}

}  // namespace dqfd::cli
