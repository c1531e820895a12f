// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: dqfd_acceptance [criterion ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dqfd/agent.hpp"
#include "dqfd/evaluation.hpp"
#include "dqfd/replay_buffer.hpp"
#include "dqfd/sum_tree.hpp"
#include "dqfd/trainer.hpp"
#include "gradient_check.hpp"

namespace dqfd {
namespace {

// Pinned thresholds and tolerances.
constexpr double kRuleSr = 100.0;
constexpr double kRuleSeconds = 10.0;
constexpr std::size_t kEvalEpisodes = 100;
constexpr double kDqfdMinSr = 90.0;
constexpr double kDqnMaxSr = 40.0;
constexpr double kMinGap = 40.0;
constexpr double kRunSeconds = 45.0 * 60.0;
constexpr double kWeakLow = 50.0;
constexpr double kWeakHigh = 70.0;
constexpr double kWeakMargin = 10.0;
constexpr int kWeakSeedsNeeded = 2;
constexpr std::size_t kCalibrationEpisodes = 1'000;
constexpr double kPretrainMinSr = 80.0;
constexpr double kRecoverySlack = 10.0;
constexpr double kRecoveryFraction = 0.25;
constexpr std::size_t kTrendWindow = 100;
constexpr double kOracleTol = 1e-12;
constexpr double kGradTol = 1e-4;
constexpr int kGradNets = 20;
constexpr double kFreqTol = 0.02;
constexpr std::size_t kFreqDraws = 100'000;
constexpr double kTreeTol = 1e-9;

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fixed(double v, int digits = 1) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const EntityDatabase> desk_db() {
  static const auto db = std::make_shared<const EntityDatabase>(
      EntityDatabase::generate(load_ontology(default_ontology_text()), 7));
  return db;
}

EnvFactory desk_env() {
  const auto db = desk_db();
  return [db] { return DialogEnv(db); };
}

double greedy_sr(const QNetwork& net, std::uint64_t seed) {
  const auto snapshot = std::make_shared<const QNetwork>(net);
  return run_episodes(greedy_policy(snapshot), desk_env(), kEvalEpisodes, seed).success_rate;
}

std::uint64_t eval_seed(std::uint64_t train_seed) { return 10'000 + train_seed; }

struct TrainedRun {
  RunArtifacts run;
  double final_sr = 0.0;
  double seconds = 0.0;
};

// Desk-preset runs are shared between criteria.
TrainedRun& desk_run(const std::string& label, const AgentConfig& config, std::uint64_t seed) {
  static std::map<std::string, TrainedRun> cache;
  const std::string key = label + "/" + std::to_string(seed);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  std::cerr << "  training " << key << " ..." << std::flush;
  TrainOptions opt;
  opt.seed = seed;
  opt.db = desk_db();
  const auto t0 = std::chrono::steady_clock::now();
  TrainedRun r;
  r.run = train(config, opt);
  r.seconds = seconds_since(t0);
  r.final_sr = greedy_sr(r.run.final_net, eval_seed(seed));
  std::cerr << " SR " << fixed(r.final_sr) << " (" << fixed(r.seconds, 0) << " s)\n";
  return cache.emplace(key, std::move(r)).first->second;
}

AgentConfig dqfd_rule() { return AgentConfig::desk(); }

AgentConfig dqn() {
  auto c = AgentConfig::desk();
  c.mode = Mode::kDqn;
  return c;
}

// ---------------------------------------------------------------------------

Outcome environment_solvability() {
  const auto make = desk_env();
  const DialogEnv probe = make();
  const auto rule = make_expert_policy(ExpertKind::rule(), probe.actions(), probe.database_ptr());
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = run_episodes(rule, make, kEvalEpisodes, 1);
  const double s = seconds_since(t0);
  return {report.success_rate == kRuleSr && s < kRuleSeconds,
          "rule SR " + fixed(report.success_rate) + " over 100 episodes in " + fixed(s, 2) + " s"};
}

Outcome headline_gap() {
  bool pass = true;
  std::string detail;
  for (auto seed : kSeeds) {
    const auto& a = desk_run("dqfd-rule", dqfd_rule(), seed);
    const auto& b = desk_run("dqn", dqn(), seed);
    const bool ok = a.final_sr >= kDqfdMinSr && b.final_sr <= kDqnMaxSr &&
                    a.final_sr - b.final_sr >= kMinGap && a.seconds < kRunSeconds &&
                    b.seconds < kRunSeconds;
    pass = pass && ok;
    detail += "seed " + std::to_string(seed) + ": DQfD " + fixed(a.final_sr) + " vs DQN " +
              fixed(b.final_sr) + " (" + fixed(a.seconds, 0) + "/" + fixed(b.seconds, 0) + " s); ";
  }
  return {pass, detail};
}

Outcome weak_expert_exceedance() {
  const auto cal = calibrate_weak_expert(desk_env(), kCalibrationEpisodes, 77,
                                         {0.3, 0.4, 0.5, 0.6}, 60.0);
  std::string detail = "weak expert error " + fixed(cal.error_rate, 2) + " SR " +
                       fixed(cal.success_rate) + "; ";
  if (cal.success_rate < kWeakLow || cal.success_rate > kWeakHigh)
    return {false, detail + "calibration outside [50, 70]"};
  auto c = AgentConfig::desk();
  c.demo_source = ExpertKind::weak(cal.error_rate);
  int wins = 0;
  for (auto seed : kSeeds) {
    const auto& r = desk_run("dqfd-weak", c, seed);
    const bool ok = r.final_sr >= cal.success_rate + kWeakMargin;
    wins += ok ? 1 : 0;
    detail += "seed " + std::to_string(seed) + ": " + fixed(r.final_sr) + (ok ? " ok; " : " short; ");
  }
  return {wins >= kWeakSeedsNeeded, detail + std::to_string(wins) + "/3 seeds exceed"};
}

// Windowed SR over agent episodes only, so demonstration episodes never mix
// into a post-pretraining window.
Outcome pretraining_head_start() {
  bool pass = true;
  std::string detail;
  for (auto seed : kSeeds) {
    const auto& r = desk_run("dqfd-rule", dqfd_rule(), seed);
    std::vector<double> demo, agent;
    std::vector<std::int64_t> agent_frames;
    for (const auto& e : r.run.episodes) {
      (e.phase == "demo" ? demo : agent).push_back(e.success ? 100.0 : 0.0);
      if (e.phase == "agent") agent_frames.push_back(e.frame);
    }
    if (demo.empty() || agent.size() < kTrendWindow) {
      pass = false;
      detail += "seed " + std::to_string(seed) + ": too few episodes; ";
      continue;
    }
    const double pre = moving_average(demo, kTrendWindow).back();
    const auto ma = moving_average(agent, kTrendWindow);
    const auto limit = r.run.demo_frames +
                       static_cast<std::int64_t>(kRecoveryFraction * dqfd_rule().total_frames);
    std::optional<std::int64_t> recovered;
    double dip = 100.0;
    for (std::size_t i = kTrendWindow - 1; i < ma.size(); ++i) {
      dip = std::min(dip, ma[i]);
      if (ma[i] >= pre - kRecoverySlack) {
        recovered = agent_frames[i];
        break;
      }
    }
    const bool ok = pre >= kPretrainMinSr && recovered && *recovered <= limit;
    pass = pass && ok;
    detail += "seed " + std::to_string(seed) + ": pretrain " + fixed(pre) + ", dip " + fixed(dip) +
              ", recovered at " + (recovered ? std::to_string(*recovered) : "never") + " (limit " +
              std::to_string(limit) + "); ";
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------

QNetwork constant_net(std::size_t input, const std::vector<double>& q) {
  QNetwork net(QNetShape{input, 1, q.size()});
  net.b1()(0) = 1.0;
  double mean = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) {
    net.b_a()(static_cast<Eigen::Index>(a)) = q[a];
    mean += q[a];
  }
  net.b_v() = mean / static_cast<double>(q.size());
  return net;
}

Outcome loss_oracles() {
  std::vector<std::string> failures;
  int cases = 0;
  auto check = [&](const std::string& name, double got, double want) {
    ++cases;
    if (!(std::abs(got - want) <= kOracleTol))
      failures.push_back(name + " got " + std::to_string(got) + " want " + std::to_string(want));
  };
  auto vec2 = [](double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
  };
  check("margin a_E=1", margin_loss(vec2(1.0, 2.0), 1, 0.8), 0.0);
  check("margin a_E=0", margin_loss(vec2(1.0, 2.0), 0, 0.8), 1.8);
  check("margin self", margin_loss(vec2(0.0, 0.0), 0, 0.8), 0.8);

  const auto online3 = constant_net(2, {1, 5, 3});
  const auto target3 = constant_net(2, {2, 0, 4});
  const Transition terminal{{0, 1}, 0, 79.0, {1, 0}, true, false};
  const Transition step{{0, 1}, 0, -1.0, {1, 0}, false, false};
  const std::vector<const Transition*> tb{&terminal, &step};
  const auto y = compute_targets(tb, online3, target3, 0.9);
  check("target terminal", y[0], 79.0);
  check("target double", y[1], -1.0 + 0.9 * 0.0);
  const auto y0 = compute_targets(tb, online3, target3, 0.0);
  check("target gamma 0 terminal", y0[0], 79.0);
  check("target gamma 0 step", y0[1], -1.0);

  // Two-sample batch: agent (a=0, r=-1) and terminal demo (a=0, r=10).
  const auto online = constant_net(2, {1, 2});
  const auto target = constant_net(2, {2, 0});
  const Transition agent{{0, 1}, 0, -1.0, {1, 0}, false, false};
  const Transition demo{{0, 1}, 0, 10.0, {1, 0}, true, true};
  const std::vector<const Transition*> batch{&agent, &demo};
  const std::vector<double> w{1.0, 0.5};
  auto config = AgentConfig::desk();
  const double y_agent = -1.0 + 0.9 * 0.0;  // argmax online = 1, target value 0
  const double d_agent = y_agent - 1.0;
  const double d_demo = 10.0 - 1.0;
  const double td = (w[0] * d_agent * d_agent + w[1] * d_demo * d_demo) / 2.0;
  const double margin = std::max(1.0 + 0.0, 2.0 + 0.8) - 1.0;
  const double l2 = config.l2 * (1.0 + 1.5 * 1.5 + 1.0 + 4.0);
  const auto r = total_loss(batch, w, online, target, config);
  check("total td", r.td_loss, td);
  check("total margin", r.margin, margin);
  check("total loss", r.loss, td + margin + l2);
  check("delta agent", r.td[0], d_agent);
  check("delta demo", r.td[1], d_demo);

  const std::vector<const Transition*> agent_only{&agent};
  const std::vector<double> w1{1.0};
  const double dqfd_loss = total_loss(agent_only, w1, online, target, config).loss;
  config.mode = Mode::kDqn;
  check("no-demo batch equals DQN", dqfd_loss,
        total_loss(agent_only, w1, online, target, config).loss);
  config.mode = Mode::kDqfd;

  const auto satisfied = constant_net(2, {3.0, 2.0, 1.0});
  const Transition demo0{{0, 1}, 0, 0.0, {1, 0}, true, true};
  const std::vector<const Transition*> sb{&demo0};
  check("satisfied margin", total_loss(sb, w1, satisfied, satisfied, config).margin, 0.0);

  std::string detail = std::to_string(cases - static_cast<int>(failures.size())) + "/" +
                       std::to_string(cases) + " cases within 1e-12";
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

Outcome gradient_correctness() {
  Rng rng(2024);
  auto config = AgentConfig::desk();
  config.l2 = 1e-3;
  double worst = 0.0;
  int checked = 0, skipped = 0;
  while (checked < kGradNets) {
    const auto net = test::random_net(QNetShape{5, 4, 3}, rng);
    const auto tgt = test::random_net(QNetShape{5, 4, 3}, rng);
    const auto tb = test::random_batch(net, 4, rng);
    std::vector<Transition> ts;
    for (std::size_t i = 0; i < 4; ++i)
      ts.push_back(Transition{tb.states[i], tb.actions[i], tb.targets[i],
                              test::random_input(5, rng), i == 0, i % 2 == 1});
    std::vector<const Transition*> batch;
    for (const auto& t : ts) batch.push_back(&t);
    // Finite differences are undefined at max/argmax switches.
    bool near_tie = false;
    for (const auto& t : ts) {
      auto gap = [](Eigen::VectorXd v) {
        std::sort(v.data(), v.data() + v.size());
        return v(v.size() - 1) - v(v.size() - 2);
      };
      Eigen::VectorXd aug = net.forward(t.s).array() + config.tau;
      aug(t.a) -= config.tau;
      if (gap(aug) < 1e-3 || gap(net.forward(t.s_next)) < 1e-3) near_tie = true;
    }
    if (near_tie) {
      ++skipped;
      continue;
    }
    const auto analytic = total_loss(batch, tb.weights, net, tgt, config).grad;
    const auto numeric = test::central_difference(net, [&](const QNetwork& n) {
      return total_loss(batch, tb.weights, n, tgt, config).loss;
    });
    worst = std::max(worst, test::max_relative_error(analytic, numeric));
    ++checked;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "max relative error %.2e over %d nets (%d near-tie draws redrawn)",
                worst, checked, skipped);
  return {worst <= kGradTol, buf};
}

Transition tagged(std::uint32_t id, bool demo) {
  Transition t;
  t.s = {static_cast<std::uint8_t>(id & 1)};
  t.s_next = t.s;
  t.a = id;
  t.r = static_cast<double>(id);
  t.is_demo = demo;
  return t;
}

Outcome replay_properties() {
  // Demo retention after pushing twice the capacity of agent transitions.
  ReplayConfig rc;
  rc.capacity = 1'000;
  ReplayBuffer buf(rc);
  std::multiset<double> demos, held;
  for (std::uint32_t i = 0; i < 50; ++i) {
    buf.push(tagged(i, true));
    demos.insert(i);
  }
  for (std::uint32_t i = 0; i < 2 * 1'000 + 37; ++i) buf.push(tagged(100 + i, false));
  for (std::size_t i = 0; i < buf.size(); ++i)
    if (buf.at(i).is_demo) held.insert(buf.at(i).r);
  const bool retention = held == demos && buf.agent_count() == rc.capacity;

  // Frozen 8-element buffer, empirical vs exact sampling probabilities.
  ReplayBuffer small;
  for (std::uint32_t i = 0; i < 3; ++i) small.push(tagged(i, true));
  for (std::uint32_t i = 3; i < 8; ++i) small.push(tagged(i, false));
  const std::vector<double> td{0.0, 0.5, 2.0, 0.1, 1.0, 3.0, 0.02, 5.0};
  small.update_priorities({0, 1, 2, 3, 4, 5, 6, 7}, td);
  std::vector<double> p(8);
  double z = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    p[i] = std::pow(std::abs(td[i]) + 0.001 + (i < 3 ? 0.01 : 0.0), 0.6);
    z += p[i];
  }
  Rng rng(99);
  std::vector<double> counts(8, 0.0);
  std::size_t draws = 0;
  while (draws < kFreqDraws) {
    for (auto i : small.sample(32, rng).indices) counts[i] += 1.0;
    draws += 32;
  }
  double worst_freq = 0.0;
  for (std::size_t i = 0; i < 8; ++i)
    worst_freq = std::max(worst_freq, std::abs(counts[i] / static_cast<double>(draws) - p[i] / z));

  // Sum-tree root against an explicit leaf sum under random updates.
  SumTree tree;
  Rng trng(5);
  double worst_root = 0.0;
  for (int k = 0; k < 50'000; ++k) {
    tree.set(uniform_index(trng, 4'096), std::pow(10.0, 6.0 * uniform01(trng) - 3.0));
    if (k % 1'000 == 999) {
      double leaves = 0.0;
      for (std::size_t i = 0; i < tree.size(); ++i) leaves += tree.get(i);
      worst_root = std::max(worst_root, std::abs(tree.total() - leaves) / leaves);
    }
  }
  char buf2[200];
  std::snprintf(buf2, sizeof buf2,
                "demo multiset %s; max |freq - P| %.4f over %zu draws; root rel err %.1e",
                retention ? "retained" : "LOST", worst_freq, draws, worst_root);
  return {retention && worst_freq <= kFreqTol && worst_root <= kTreeTol, buf2};
}

AgentConfig reduced_config() {
  auto c = AgentConfig::desk();
  c.total_frames = 6'000;
  c.eps_decay_frames = 2'000;
  c.train_every = 500;
  c.batches_per_round = 100;
  c.pretrain_demo_episodes = 50;
  c.pretrain_gradient_steps = 300;
  c.checkpoint_every = 2'000;
  c.replay.capacity = 4'000;
  c.lr_schedule.step_frames = 2'000;
  return c;
}

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto base = std::filesystem::temp_directory_path() / "dqfd_acceptance_determinism";
  std::filesystem::remove_all(base);
  std::vector<std::string> logs, finals;
  for (const char* name : {"first", "second"}) {
    TrainOptions opt;
    opt.seed = 42;
    opt.db = desk_db();
    opt.run_dir = base / name;
    const auto run = train(reduced_config(), opt);
    logs.push_back(file_bytes(*opt.run_dir / "episodes.tsv"));
    finals.push_back(file_bytes(*opt.run_dir / "checkpoints" /
                                ("frame-" + std::to_string(run.checkpoints.back().frame) + ".ckpt")));
  }
  std::filesystem::remove_all(base);
  const bool same = logs[0] == logs[1] && finals[0] == finals[1] && !logs[0].empty() &&
                    !finals[0].empty();
  return {same, "episode log " + std::to_string(logs[0].size()) + " bytes, final checkpoint " +
                    std::to_string(finals[0].size()) + " bytes, " +
                    (same ? "bitwise identical" : "DIFFER")};
}

Outcome dqn_reduction() {
  auto a = reduced_config();
  a.mode = Mode::kDqn;
  auto b = reduced_config();
  b.mode = Mode::kDqfd;
  b.pretrain_demo_episodes = 0;
  b.pretrain_gradient_steps = 0;
  b.margin_weight = 0.0;
  TrainOptions opt;
  opt.seed = 9;
  opt.db = desk_db();
  const auto ra = train(a, opt);
  const auto rb = train(b, opt);
  bool same = ra.episodes.size() == rb.episodes.size() &&
              ra.checkpoints.size() == rb.checkpoints.size() &&
              ra.final_net.params() == rb.final_net.params();
  for (std::size_t i = 0; same && i < ra.episodes.size(); ++i) {
    const auto& x = ra.episodes[i];
    const auto& y = rb.episodes[i];
    same = x.frame == y.frame && x.ret == y.ret && x.turns == y.turns && x.success == y.success &&
           x.loss_mean == y.loss_mean && x.loss_std == y.loss_std && x.phase == y.phase;
  }
  for (std::size_t i = 0; same && i < ra.checkpoints.size(); ++i)
    same = ra.checkpoints[i].net.params() == rb.checkpoints[i].net.params();
  return {same, std::to_string(ra.episodes.size()) + " episodes and " +
                    std::to_string(ra.checkpoints.size()) + " checkpoints " +
                    (same ? "identical" : "DIFFER")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace dqfd

int main(int argc, char** argv) {
  using namespace dqfd;
  const std::vector<Criterion> all{
      {1, "environment solvability", environment_solvability},
      {2, "headline gap DQfD-rule vs DQN", headline_gap},
      {3, "weak-expert exceedance", weak_expert_exceedance},
      {4, "pre-training head start", pretraining_head_start},
      {5, "loss oracles", loss_oracles},
      {6, "gradient correctness", gradient_correctness},
      {7, "replay properties", replay_properties},
      {8, "determinism", determinism},
      {9, "DQN reduction", dqn_reduction},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

  // Cheap criteria first; the training-heavy ones share cached runs.
  const std::vector<int> order{1, 5, 6, 7, 8, 9, 2, 4, 3};
  std::map<int, std::pair<Outcome, double>> results;
  for (int id : order) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto& c = all[static_cast<std::size_t>(id - 1)];
    std::cerr << "criterion " << id << ": " << c.name << "\n";
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    results[id] = {o, seconds_since(t0)};
  }

  int failed = 0;
  for (const auto& [id, r] : results) {
    const auto& [o, s] = r;
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << "  "
              << all[static_cast<std::size_t>(id - 1)].name << "  [" << o.detail << "] ("
              << fixed(s, 1) << " s)\n";
  }
  std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size()
            << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
