#include "dqfd/evaluation.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "dqfd/featurizer.hpp"

namespace dqfd {

MetricsReport MetricsReport::from_episodes(const std::vector<EpisodeMetrics>& rows) {
  MetricsReport r;
  r.episodes = rows.size();
  if (rows.empty()) return r;
  double booked = 0.0;
  for (const auto& e : rows) {
    r.avg_turns += e.turns;
    r.avg_return += e.ret;
    r.precision += e.report.precision;
    r.recall += e.report.recall;
    r.f1 += e.report.f1;
    r.success_rate += e.report.success ? 1.0 : 0.0;
    if (e.report.wanted_bookings > 0) {
      ++r.booking_episodes;
      booked += e.report.booked_fraction;
    }
  }
  const double n = static_cast<double>(rows.size());
  r.avg_turns /= n;
  r.avg_return /= n;
  r.precision *= 100.0 / n;
  r.recall *= 100.0 / n;
  r.f1 *= 100.0 / n;
  r.success_rate *= 100.0 / n;
  r.book_rate = r.booking_episodes ? 100.0 * booked / static_cast<double>(r.booking_episodes) : 0.0;
  return r;
}

MetricsReport MetricsReport::merge(const MetricsReport& a, const MetricsReport& b) {
  MetricsReport r;
  r.episodes = a.episodes + b.episodes;
  r.booking_episodes = a.booking_episodes + b.booking_episodes;
  if (r.episodes == 0) return r;
  const double wa = static_cast<double>(a.episodes) / static_cast<double>(r.episodes);
  const double wb = 1.0 - wa;
  r.avg_turns = wa * a.avg_turns + wb * b.avg_turns;
  r.avg_return = wa * a.avg_return + wb * b.avg_return;
  r.precision = wa * a.precision + wb * b.precision;
  r.recall = wa * a.recall + wb * b.recall;
  r.f1 = wa * a.f1 + wb * b.f1;
  r.success_rate = wa * a.success_rate + wb * b.success_rate;
  if (r.booking_episodes > 0) {
    const double ba = static_cast<double>(a.booking_episodes) / static_cast<double>(r.booking_episodes);
    r.book_rate = ba * a.book_rate + (1.0 - ba) * b.book_rate;
  }
  return r;
}

MetricsReport run_episodes(const Policy& policy, const EnvFactory& make_env, std::size_t n,
                           std::uint64_t seed, std::vector<EpisodeMetrics>* rows) {
  if (n == 0) throw std::invalid_argument("run_episodes: n must be at least 1");
  DialogEnv env = make_env();
  const auto& ontology = env.database().ontology();
  const FeatureLayout layout(ontology);
  std::vector<EpisodeMetrics> local;
  local.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Rng goal_rng = derive_rng(seed, k);
    env.reset(goal_rng);
    while (!env.done()) env.step(policy(env.state(), featurize(env.state(), ontology, layout)));
    local.push_back({k, env.state().turn, env.episode_return(), evaluate_goal(env.goal(), env.log())});
  }
  auto report = MetricsReport::from_episodes(local);
  if (rows) *rows = std::move(local);
  return report;
}

std::vector<double> moving_average(const std::vector<double>& series, std::size_t window) {
  if (window == 0) throw std::invalid_argument("moving_average: window must be at least 1");
  std::vector<double> out(series.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series[i];
    if (i >= window) sum -= series[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

std::size_t select_best_checkpoint(const std::vector<EpisodeRow>& episodes,
                                   const std::vector<std::int64_t>& checkpoint_frames,
                                   std::size_t window) {
  if (checkpoint_frames.empty()) throw std::invalid_argument("select_best_checkpoint: no checkpoints");
  std::vector<double> returns;
  std::vector<std::int64_t> frames;
  for (const auto& e : episodes) {
    if (e.phase != "agent") continue;
    returns.push_back(e.ret);
    frames.push_back(e.frame);
  }
  const auto ma = moving_average(returns, window);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  std::size_t j = 0;  // episodes finished by the current checkpoint
  for (std::size_t c = 0; c < checkpoint_frames.size(); ++c) {
    while (j < frames.size() && frames[j] <= checkpoint_frames[c]) ++j;
    const double value = j == 0 ? -std::numeric_limits<double>::infinity() : ma[j - 1];
    if (value > best_value) {
      best_value = value;
      best = c;
    }
  }
  return best;
}

std::size_t select_best_checkpoint(const RunArtifacts& run, std::size_t window) {
  std::vector<std::int64_t> frames;
  for (const auto& c : run.checkpoints) frames.push_back(c.frame);
  return select_best_checkpoint(run.episodes, frames, window);
}

void write_trends(std::ostream& out, const std::vector<EpisodeRow>& episodes, std::size_t window) {
  out << "frame\tsuccess_rate\tavg_turns\n";
  std::vector<double> success, turns;
  for (const auto& e : episodes) {
    success.push_back(e.success ? 100.0 : 0.0);
    turns.push_back(e.turns);
  }
  const auto s = moving_average(success, window);
  const auto t = moving_average(turns, window);
  for (std::size_t i = 0; i < episodes.size(); ++i)
    out << episodes[i].frame << '\t' << s[i] << '\t' << t[i] << '\n';
}

Calibration calibrate_weak_expert(const EnvFactory& make_env, std::size_t episodes,
                                  std::uint64_t seed, const std::vector<double>& error_rates,
                                  double target_sr) {
  if (error_rates.empty()) throw std::invalid_argument("calibrate_weak_expert: empty sweep");
  Calibration cal;
  const DialogEnv probe = make_env();
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < error_rates.size(); ++i) {
    const Policy expert =
        make_expert_policy(ExpertKind::weak(error_rates[i]), probe.actions(), probe.database_ptr(),
                           derive_rng(seed, 0xe0));
    const auto report = run_episodes(expert, make_env, episodes, seed);
    cal.sweep.push_back({error_rates[i], report});
    const double gap = std::abs(report.success_rate - target_sr);
    if (gap < best_gap) {
      best_gap = gap;
      cal.error_rate = error_rates[i];
      cal.success_rate = report.success_rate;
    }
  }
  return cal;
}

}  // namespace dqfd
