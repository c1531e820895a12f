#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "dqfd/experts.hpp"
#include "dqfd/trainer.hpp"
#include "dqfd/user_simulator.hpp"

namespace dqfd {

struct EpisodeMetrics {
  std::size_t index = 0;
  int turns = 0;
  double ret = 0.0;
  GoalReport report;
};

// Percentages (0..100) averaged over episodes. book_rate averages the booked
// fraction over the episodes whose goal wanted at least one booking.
struct MetricsReport {
  std::size_t episodes = 0;
  std::size_t booking_episodes = 0;
  double avg_turns = 0.0;
  double avg_return = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double success_rate = 0.0;
  double book_rate = 0.0;

  static MetricsReport from_episodes(const std::vector<EpisodeMetrics>& rows);
  // Report of the union of two disjoint episode sets.
  static MetricsReport merge(const MetricsReport& a, const MetricsReport& b);
};

using EnvFactory = std::function<DialogEnv()>;

// n episodes; episode k draws its goal from derive_rng(seed, k). The policy
// sees the tracked state and its featurization.
MetricsReport run_episodes(const Policy& policy, const EnvFactory& make_env, std::size_t n,
                           std::uint64_t seed, std::vector<EpisodeMetrics>* rows = nullptr);

// Trailing mean; the first window-1 entries average the available prefix.
std::vector<double> moving_average(const std::vector<double>& series, std::size_t window);

// Index of the checkpoint whose frame has the highest trailing moving-average
// episode return (agent-phase episodes only; earliest wins ties).
std::size_t select_best_checkpoint(const std::vector<EpisodeRow>& episodes,
                                   const std::vector<std::int64_t>& checkpoint_frames,
                                   std::size_t window = 100);
std::size_t select_best_checkpoint(const RunArtifacts& run, std::size_t window = 100);

// One row per episode: frame, windowed success rate (%), windowed average turns.
void write_trends(std::ostream& out, const std::vector<EpisodeRow>& episodes,
                  std::size_t window = 100);

struct CalibrationPoint {
  double error_rate = 0.0;
  MetricsReport report;
};

struct Calibration {
  std::vector<CalibrationPoint> sweep;
  double error_rate = 0.0;    // chosen value
  double success_rate = 0.0;  // its measured SR
};

// Evaluates the weak expert at each error rate and picks the one whose SR is
// nearest `target_sr` (earliest on ties).
Calibration calibrate_weak_expert(const EnvFactory& make_env, std::size_t episodes,
                                  std::uint64_t seed,
                                  const std::vector<double>& error_rates = {0.1, 0.2, 0.3, 0.4, 0.5},
                                  double target_sr = 61.0);

}  // namespace dqfd
