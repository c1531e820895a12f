#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqfd/agent.hpp"
#include "dqfd/database.hpp"

namespace dqfd::cli {

// Failure reported to the user. `code` is a short stable name such as
// "MissingDemos"; exit_code follows the CLI convention (1 usage, 2 runtime).
class CliError : public std::runtime_error {
 public:
  CliError(std::string code, int exit_code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)), exit_code_(exit_code) {}
  const std::string& code() const { return code_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string code_;
  int exit_code_;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

enum class Preset { kDesk, kPaper };

std::string preset_name(Preset preset);
Preset parse_preset(const std::string& text);

struct RunConfig {
  Preset preset = Preset::kDesk;
  AgentConfig agent = AgentConfig::desk();
  std::optional<std::filesystem::path> ontology;  // embedded default when unset
  std::uint64_t db_seed = 7;
  std::vector<std::uint64_t> seeds;
  std::optional<std::filesystem::path> demos;
  std::size_t eval_episodes = 100;
  double sr_floor = 50.0;  // demo-collect warns below this expert SR

  friend bool operator==(const RunConfig& a, const RunConfig& b);
};

// Keys accepted in config files and as --key flags: the agent fields plus
// preset, ontology, db_seed, seeds, demos, eval_episodes, sr_floor.
std::vector<std::string> config_keys();

// Applies `key = value` pairs. `preset` is applied first, whatever its
// position, so explicit fields always win over preset defaults.
void apply_settings(RunConfig& config, const std::vector<std::pair<std::string, std::string>>& kv);

// `key = value` lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> parse_settings(const std::string& text);
RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& config);
RunConfig load_config_file(const std::filesystem::path& path);

// Throws CliError(BadConfig) for a referenced path that does not exist or an
// agent field out of range.
void validate(const RunConfig& config);

Ontology load_run_ontology(const RunConfig& config);
std::shared_ptr<const EntityDatabase> make_database(const RunConfig& config);

}  // namespace dqfd::cli
