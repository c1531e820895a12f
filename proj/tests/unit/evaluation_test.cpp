#include <gtest/gtest.h>

#include <memory>
#include <sstream>

#include "dqfd/evaluation.hpp"
#include "support.hpp"

namespace dqfd {
namespace {

EpisodeMetrics episode(bool success, int turns, double f1, std::size_t bookings, double booked) {
  EpisodeMetrics e;
  e.turns = turns;
  e.ret = success ? 80.0 - turns : -40.0 - turns;
  e.report.success = success;
  e.report.precision = f1;
  e.report.recall = f1;
  e.report.f1 = f1;
  e.report.wanted_bookings = bookings;
  e.report.booked_fraction = booked;
  return e;
}

EnvFactory desk_env() {
  const auto db = test::desk_db();
  return [db] { return DialogEnv(db); };
}

TEST(Metrics, TwoOfFourSucceed) {
  const auto r = MetricsReport::from_episodes({episode(true, 6, 1.0, 1, 1.0),
                                               episode(false, 40, 0.0, 1, 0.0),
                                               episode(true, 8, 1.0, 0, 0.0),
                                               episode(false, 10, 0.5, 0, 0.0)});
  EXPECT_EQ(r.episodes, 4u);
  EXPECT_DOUBLE_EQ(r.success_rate, 50.0);
  EXPECT_DOUBLE_EQ(r.avg_turns, 16.0);
  EXPECT_DOUBLE_EQ(r.avg_return, (74.0 - 80.0 + 72.0 - 50.0) / 4.0);
  EXPECT_DOUBLE_EQ(r.f1, 62.5);
  EXPECT_EQ(r.booking_episodes, 2u);
  EXPECT_DOUBLE_EQ(r.book_rate, 50.0);
}

TEST(Metrics, EmptyIsZero) {
  const auto r = MetricsReport::from_episodes({});
  EXPECT_EQ(r.episodes, 0u);
  EXPECT_EQ(r.success_rate, 0.0);
}

TEST(Metrics, MergeIsCountWeighted) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EpisodeMetrics> a, b, all;
    const auto na = 1 + uniform_index(rng, 20);
    const auto nb = 1 + uniform_index(rng, 20);
    for (std::size_t i = 0; i < na + nb; ++i) {
      const auto e = episode(bernoulli(rng, 0.5), 1 + static_cast<int>(uniform_index(rng, 40)),
                             uniform01(rng), uniform_index(rng, 3), uniform01(rng));
      (i < na ? a : b).push_back(e);
      all.push_back(e);
    }
    const auto merged = MetricsReport::merge(MetricsReport::from_episodes(a),
                                             MetricsReport::from_episodes(b));
    const auto direct = MetricsReport::from_episodes(all);
    EXPECT_EQ(merged.episodes, direct.episodes);
    EXPECT_EQ(merged.booking_episodes, direct.booking_episodes);
    EXPECT_NEAR(merged.success_rate, direct.success_rate, 1e-9);
    EXPECT_NEAR(merged.avg_turns, direct.avg_turns, 1e-9);
    EXPECT_NEAR(merged.avg_return, direct.avg_return, 1e-9);
    EXPECT_NEAR(merged.f1, direct.f1, 1e-9);
    EXPECT_NEAR(merged.book_rate, direct.book_rate, 1e-9);
  }
}

TEST(MovingAverage, Cases) {
  EXPECT_EQ(moving_average({0.0, 10.0}, 2), (std::vector<double>{0.0, 5.0}));
  const std::vector<double> flat(7, 3.5);
  EXPECT_EQ(moving_average(flat, 3), flat);
  const std::vector<double> s{4.0, -1.0, 9.0, 2.0};
  EXPECT_EQ(moving_average(s, 1), s);
  EXPECT_EQ(moving_average({1.0, 2.0, 3.0, 4.0}, 3), (std::vector<double>{1.0, 1.5, 2.0, 3.0}));
  EXPECT_THROW(moving_average(s, 0), std::invalid_argument);
}

TEST(MovingAverage, MatchesDirectMean) {
  Rng rng(2);
  std::vector<double> s(300);
  for (auto& v : s) v = uniform01(rng) * 100.0 - 50.0;
  for (std::size_t w : {1u, 5u, 100u, 400u}) {
    const auto ma = moving_average(s, w);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::size_t lo = i + 1 >= w ? i + 1 - w : 0;
      double sum = 0.0;
      for (std::size_t k = lo; k <= i; ++k) sum += s[k];
      EXPECT_NEAR(ma[i], sum / static_cast<double>(i + 1 - lo), 1e-9);
    }
  }
}

std::vector<EpisodeRow> agent_rows(const std::vector<double>& returns) {
  std::vector<EpisodeRow> rows;
  for (std::size_t i = 0; i < returns.size(); ++i)
    rows.push_back({static_cast<std::int64_t>(10 * (i + 1)), static_cast<std::int64_t>(i + 1),
                    "agent", returns[i], 5, false, 0.0, 0.0, 0.0});
  return rows;
}

TEST(BestCheckpoint, Argmax) {
  EXPECT_EQ(select_best_checkpoint(agent_rows({10, 50, 20}), {10, 20, 30}, 1), 1u);
}

TEST(BestCheckpoint, TiesGoToEarliest) {
  EXPECT_EQ(select_best_checkpoint(agent_rows({7, 7, 7}), {10, 20, 30}, 1), 0u);
}

TEST(BestCheckpoint, MonotoneRunPicksLast) {
  std::vector<double> r;
  for (int i = 0; i < 50; ++i) r.push_back(i);
  EXPECT_EQ(select_best_checkpoint(agent_rows(r), {100, 200, 300, 400, 500}, 10), 4u);
}

TEST(BestCheckpoint, IgnoresDemoEpisodes) {
  auto rows = agent_rows({-40, -30});
  rows.insert(rows.begin(), EpisodeRow{5, 0, "demo", 75.0, 5, true, 0.0, 0.0, 0.0});
  EXPECT_EQ(select_best_checkpoint(rows, {5, 10, 20}, 1), 2u);
  EXPECT_THROW(select_best_checkpoint(rows, {}, 1), std::invalid_argument);
}

TEST(Trends, HeaderOnlyForEmptyLog) {
  std::ostringstream out;
  write_trends(out, {});
  EXPECT_EQ(out.str(), "frame\tsuccess_rate\tavg_turns\n");
}

TEST(Trends, OneRowPerEpisode) {
  std::vector<EpisodeRow> rows{{6, 1, "demo", 74, 6, true, 0, 0, 0},
                               {46, 2, "agent", -80, 40, false, 0.1, 0, 0},
                               {54, 3, "agent", 72, 8, true, 0.1, 0, 0}};
  std::ostringstream out;
  write_trends(out, rows, 2);
  EXPECT_EQ(out.str(),
            "frame\tsuccess_rate\tavg_turns\n"
            "6\t100\t6\n"
            "46\t50\t23\n"
            "54\t50\t24\n");
}

TEST(RunEpisodes, RuleExpertSolvesEverything) {
  const auto make = desk_env();
  const DialogEnv probe = make();
  const auto rule = make_expert_policy(ExpertKind::rule(), probe.actions(), probe.database_ptr());
  std::vector<EpisodeMetrics> rows;
  const auto r = run_episodes(rule, make, 100, 2024, &rows);
  EXPECT_EQ(r.success_rate, 100.0);
  EXPECT_EQ(r.book_rate, 100.0);
  EXPECT_EQ(r.f1, 100.0);
  ASSERT_EQ(rows.size(), 100u);
  for (const auto& e : rows) EXPECT_DOUBLE_EQ(e.ret, 80.0 - e.turns);
}

TEST(RunEpisodes, RandomPolicyMostlyFails) {
  const auto make = desk_env();
  const std::size_t n_actions = make().actions().size();
  auto rng = std::make_shared<Rng>(5);
  const Policy random = [rng, n_actions](const DialogState&, const FeatureVector&) {
    return uniform_index(*rng, n_actions);
  };
  const auto r = run_episodes(random, make, 100, 3);
  EXPECT_LE(r.success_rate, 20.0);
}

TEST(RunEpisodes, ReproducibleAndValidated) {
  const auto make = desk_env();
  const DialogEnv probe = make();
  const auto weak = [&] {
    return make_expert_policy(ExpertKind::weak(0.4), probe.actions(), probe.database_ptr(), Rng(8));
  };
  std::vector<EpisodeMetrics> a, b;
  run_episodes(weak(), make, 40, 17, &a);
  run_episodes(weak(), make, 40, 17, &b);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].turns, b[i].turns);
    EXPECT_EQ(a[i].ret, b[i].ret);
    EXPECT_EQ(a[i].report.f1, b[i].report.f1);
  }
  EXPECT_THROW(run_episodes(weak(), make, 0, 1), std::invalid_argument);
}

TEST(RunEpisodes, ReportRatesAreBounded) {
  const auto make = desk_env();
  const DialogEnv probe = make();
  const auto weak =
      make_expert_policy(ExpertKind::weak(0.5), probe.actions(), probe.database_ptr(), Rng(9));
  std::vector<EpisodeMetrics> rows;
  const auto r = run_episodes(weak, make, 100, 4, &rows);
  for (double v : {r.precision, r.recall, r.f1, r.success_rate, r.book_rate}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 100.0);
  }
  for (const auto& e : rows) {
    const auto& g = e.report;
    if (g.f1 > 0.0) {
      EXPECT_GE(g.f1, std::min(g.precision, g.recall) - 1e-12);
      EXPECT_LE(g.f1, std::max(g.precision, g.recall) + 1e-12);
    }
  }
}

TEST(Calibration, PicksNearestToTarget) {
  const auto cal = calibrate_weak_expert(desk_env(), 200, 5, {0.0, 0.4, 1.0}, 61.0);
  ASSERT_EQ(cal.sweep.size(), 3u);
  EXPECT_EQ(cal.sweep[0].report.success_rate, 100.0);
  EXPECT_LT(cal.sweep[2].report.success_rate, cal.sweep[1].report.success_rate);
  EXPECT_EQ(cal.error_rate, 0.4);
  EXPECT_EQ(cal.success_rate, cal.sweep[1].report.success_rate);
  EXPECT_THROW(calibrate_weak_expert(desk_env(), 10, 5, {}, 61.0), std::invalid_argument);
}

}  // namespace
}  // namespace dqfd
