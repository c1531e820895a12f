#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dqfd/agent.hpp"
#include "dqfd/demo_file.hpp"
#include "dqfd/user_simulator.hpp"

namespace dqfd {

struct EpisodeRow {
  std::int64_t frame = 0;    // frames elapsed when the episode ended
  std::int64_t episode = 0;  // 1-based
  std::string phase;         // "demo" or "agent"
  double ret = 0.0;
  int turns = 0;
  bool success = false;
  double epsilon = 0.0;      // at episode start; 0 for demonstrations
  double loss_mean = 0.0;    // over the latest training round
  double loss_std = 0.0;
};

inline constexpr const char* kEpisodeLogHeader =
    "frame\tepisode\tphase\treturn\tturns\tsuccess\tepsilon\tloss_mean\tloss_std";
void write_episode_row(std::ostream& out, const EpisodeRow& row);
std::vector<EpisodeRow> read_episode_log(std::istream& in);

struct CheckpointRecord {
  std::int64_t frame = 0;
  QNetwork net;
};

struct RunArtifacts {
  std::vector<EpisodeRow> episodes;
  std::vector<CheckpointRecord> checkpoints;  // ascending frame, last = final network
  QNetwork final_net;
  std::int64_t demo_frames = 0;  // frames taken by demonstrations
  std::vector<std::pair<std::string, std::string>> metadata;
};

struct TrainOptions {
  std::uint64_t seed = 0;
  std::shared_ptr<const EntityDatabase> db;
  SimulatorConfig sim;
  // DQfD: demonstrations to load instead of running config.demo_source.
  std::shared_ptr<const DemoSet> demos;
  // When set, the run writes episodes.tsv, metadata.txt and checkpoints here.
  std::optional<std::filesystem::path> run_dir;
  std::function<void(const EpisodeRow&)> on_episode;
};

// Config fields as (key, value) text pairs, values printed in shortest
// round-trip form.
std::vector<std::pair<std::string, std::string>> describe(const AgentConfig& config);
// Sets one field from text; false for an unknown key, std::invalid_argument
// for an unparseable value.
bool assign(AgentConfig& config, const std::string& key, const std::string& value);

// Plays `episodes` expert dialogs, recording every turn as a demo transition.
// Rows (phase "demo") are appended to `rows` when given.
DemoSet collect_demonstrations(DialogEnv& env, const Policy& expert, std::size_t episodes,
                               Rng& goal_rng, std::vector<EpisodeRow>* rows = nullptr);

// Rebuilds per-episode rows from a transition sequence (episodes end at
// terminal transitions; success is a positive terminal reward).
std::vector<EpisodeRow> demo_episode_rows(const std::vector<Transition>& transitions);

// Loads demonstrations into the protected buffer region and runs the
// demonstration-only gradient steps, syncing the target network every
// batches_per_round steps.
void pretrain(Agent& agent, const std::vector<Transition>& demos, Rng& replay_rng,
              std::int64_t frame);

// Full run: pre-training (DQfD), then epsilon-greedy acting with a training
// round of batches_per_round steps every train_every frames. All randomness
// is derived from options.seed.
RunArtifacts train(const AgentConfig& config, const TrainOptions& options);

}  // namespace dqfd
