#include "dqfd_cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dqfd/checkpoint.hpp"
#include "dqfd/demo_file.hpp"
#include "dqfd/evaluation.hpp"
#include "dqfd/trainer.hpp"
#include "dqfd_cli/chat.hpp"
#include "dqfd_cli/run_config.hpp"

namespace dqfd::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

using Settings = std::vector<std::pair<std::string, std::string>>;

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

// Config file plus per-key flag overrides shared by every subcommand.
struct ConfigArgs {
  std::string config_file;
  Settings flags;

  RunConfig resolve() const {
    Settings all;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw CliError("BadConfig", kExitUsage, "cannot read config file " + config_file);
      std::ostringstream text;
      text << in.rdbuf();
      all = parse_settings(text.str());
    }
    all.insert(all.end(), flags.begin(), flags.end());
    RunConfig c;
    apply_settings(c, all);
    return c;
  }
};

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

void add_config_options(CLI::App* app, ConfigArgs& args) {
  app->add_option("--config", args.config_file, "Config file of 'key = value' lines");
  for (const auto& key : config_keys()) {
    if (key == "seeds" || key == "demos") continue;  // dedicated options below
    app->add_option_function<std::string>(
           "--" + dashed(key), [&args, key](const std::string& v) { args.flags.emplace_back(key, v); },
           "Override config field " + key)
        ->group("Config fields");
  }
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

json to_json(const MetricsReport& r) {
  return {{"episodes", r.episodes},       {"booking_episodes", r.booking_episodes},
          {"avg_turns", r.avg_turns},     {"avg_return", r.avg_return},
          {"precision", r.precision},     {"recall", r.recall},
          {"f1", r.f1},                   {"success_rate", r.success_rate},
          {"book_rate", r.book_rate}};
}

void print_report(std::ostream& out, const MetricsReport& r) {
  out << "episodes " << r.episodes << "  turns " << fixed(r.avg_turns) << "  return "
      << fixed(r.avg_return) << "  P " << fixed(r.precision) << "  R " << fixed(r.recall)
      << "  F1 " << fixed(r.f1) << "  SR " << fixed(r.success_rate) << "  BR "
      << fixed(r.book_rate) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw CliError("Io", kExitRuntime, "cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("Io", kExitRuntime, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

EnvFactory env_factory(std::shared_ptr<const EntityDatabase> db) {
  return [db] { return DialogEnv(db); };
}

MetricsReport evaluate(const QNetwork& net, std::shared_ptr<const EntityDatabase> db,
                       std::size_t episodes, std::uint64_t seed) {
  return run_episodes(greedy_policy(std::make_shared<const QNetwork>(net)), env_factory(db),
                      episodes, seed);
}

QNetShape expected_shape(const EntityDatabase& db, std::size_t hidden) {
  return {FeatureLayout(db.ontology()).size(), hidden, enumerate_actions(db.ontology()).size()};
}

// ---------------------------------------------------------------------------

struct DemoCollectArgs {
  ConfigArgs config;
  std::string out;
  std::optional<std::size_t> episodes;
  std::string expert;
  std::uint64_t seed = 0;
};

int demo_collect(const DemoCollectArgs& a, Streams& io) {
  RunConfig c = a.config.resolve();
  if (a.episodes) c.agent.pretrain_demo_episodes = *a.episodes;
  if (a.expert == "rule") c.agent.demo_source.type = ExpertKind::Type::kRule;
  else if (a.expert == "weak") c.agent.demo_source.type = ExpertKind::Type::kWeak;
  else if (!a.expert.empty())
    throw CliError("BadConfig", kExitUsage, "--expert expects rule or weak, got '" + a.expert + "'");
  validate(c);
  if (c.agent.pretrain_demo_episodes == 0)
    throw CliError("EmptyDemoSet", kExitUsage, "0 episodes requested; nothing to record");
  if (fs::exists(a.out))
    throw CliError("OutputExists", kExitRuntime, a.out + " already exists; refusing to overwrite");

  const auto db = make_database(c);
  DialogEnv env(db);
  Rng goal_rng = derive_rng(a.seed, 2);
  const auto expert =
      make_expert_policy(c.agent.demo_source, env.actions(), db, derive_rng(a.seed, 5));
  std::vector<EpisodeRow> rows;
  const auto demos =
      collect_demonstrations(env, expert, c.agent.pretrain_demo_episodes, goal_rng, &rows);
  save_demos(a.out, demos);

  double sr = 0.0;
  for (const auto& r : rows) sr += r.success ? 1.0 : 0.0;
  sr *= 100.0 / static_cast<double>(rows.size());
  const std::string who = c.agent.demo_source.type == ExpertKind::Type::kRule
                              ? "rule"
                              : "weak(" + fixed(c.agent.demo_source.error_rate) + ")";
  io.out << "wrote " << demos.transitions.size() << " transitions from " << rows.size() << " "
         << who << " episodes to " << a.out << "\nexpert success rate " << fixed(sr) << "%\n";
  if (sr < c.sr_floor)
    io.err << "warning: expert success rate " << fixed(sr) << "% is below the floor "
           << fixed(c.sr_floor) << "%\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  ConfigArgs config;
  std::string out;
  std::vector<std::uint64_t> seeds;
  std::string seeds_list;
  std::string demos;
  bool quiet = false;
};

json train_one(const RunConfig& c, std::uint64_t seed, const fs::path& dir,
               std::shared_ptr<const EntityDatabase> db, std::shared_ptr<const DemoSet> demos,
               Streams& io, bool quiet) {
  fs::create_directories(dir);
  RunConfig snapshot = c;
  snapshot.seeds = {seed};
  write_text(dir / "config.txt", serialize_config(snapshot));
  write_text(dir / "ontology.txt", serialize_ontology(db->ontology()));

  TrainOptions opt;
  opt.seed = seed;
  opt.db = db;
  opt.demos = demos;
  opt.run_dir = dir;
  std::size_t agent_episodes = 0, window_success = 0;
  const auto t0 = std::chrono::steady_clock::now();
  opt.on_episode = [&](const EpisodeRow& row) {
    if (row.phase != "agent" || quiet) return;
    ++agent_episodes;
    window_success += row.success ? 1 : 0;
    if (agent_episodes % 1000 == 0) {
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      io.err << "seed " << seed << "  frame " << row.frame << "  episode " << row.episode
             << "  SR(last 1000) " << fixed(window_success / 10.0, 1) << "%  " << fixed(s, 0)
             << " s\n";
      window_success = 0;
    }
  };
  const auto run = train(c.agent, opt);

  std::ofstream trends(dir / "trends.tsv");
  write_trends(trends, run.episodes);

  const auto final_report = evaluate(run.final_net, db, c.eval_episodes, seed);
  const auto best = select_best_checkpoint(run);
  const auto& best_ck = run.checkpoints[best];
  const auto best_report = evaluate(best_ck.net, db, c.eval_episodes, seed);
  auto ckpt_name = [](std::int64_t frame) {
    return "checkpoints/frame-" + std::to_string(frame) + ".ckpt";
  };
  json report = {
      {"seed", seed},
      {"eval_seed", seed},
      {"eval_episodes", c.eval_episodes},
      {"demo_frames", run.demo_frames},
      {"final", {{"checkpoint", ckpt_name(run.checkpoints.back().frame)},
                 {"metrics", to_json(final_report)}}},
      {"best", {{"checkpoint", ckpt_name(best_ck.frame)},
                {"frame", best_ck.frame},
                {"metrics", to_json(best_report)}}},
  };
  write_text(dir / "report.json", report.dump(2) + "\n");
  io.out << "seed " << seed << " final  ";
  print_report(io.out, final_report);
  io.out << "seed " << seed << " best (frame " << best_ck.frame << ")  ";
  print_report(io.out, best_report);
  return report;
}

int train_cmd(const TrainArgs& a, Streams& io) {
  RunConfig c = a.config.resolve();
  if (!a.seeds_list.empty()) apply_settings(c, {{"seeds", a.seeds_list}});
  if (!a.seeds.empty()) c.seeds = a.seeds;
  if (!a.demos.empty()) c.demos = fs::path(a.demos);
  if (c.seeds.empty())
    throw CliError("MissingSeed", kExitUsage, "train needs at least one --seed");
  validate(c);
  if (c.agent.mode == Mode::kDqfd && !c.demos)
    throw CliError("MissingDemos", kExitUsage,
                   "mode dqfd needs a demonstration file; record one with `dqfd demo-collect` "
                   "and pass it with --demos");
  const fs::path out(a.out);
  if (fs::exists(out))
    throw CliError("RunDirExists", kExitRuntime,
                   out.string() + " already exists; run directories are never overwritten");

  const auto db = make_database(c);
  std::shared_ptr<const DemoSet> demos;
  if (c.agent.mode == Mode::kDqfd) demos = std::make_shared<const DemoSet>(load_demos(*c.demos));

  json runs = json::array();
  MetricsReport mean_final, mean_best;
  for (auto seed : c.seeds) {
    const std::string sub = "seed-" + std::to_string(seed);
    auto r = train_one(c, seed, out / sub, db, demos, io, a.quiet);
    r["dir"] = sub;
    runs.push_back(r);
  }
  // Mean of the per-seed reports (equal episode counts, so merge is a plain mean).
  auto from_json = [](const json& j) {
    MetricsReport m;
    m.episodes = j["episodes"];
    m.booking_episodes = j["booking_episodes"];
    m.avg_turns = j["avg_turns"];
    m.avg_return = j["avg_return"];
    m.precision = j["precision"];
    m.recall = j["recall"];
    m.f1 = j["f1"];
    m.success_rate = j["success_rate"];
    m.book_rate = j["book_rate"];
    return m;
  };
  for (const auto& r : runs) {
    mean_final = MetricsReport::merge(mean_final, from_json(r["final"]["metrics"]));
    mean_best = MetricsReport::merge(mean_best, from_json(r["best"]["metrics"]));
  }
  json summary = {{"mode", mode_name(c.agent.mode)},
                  {"seeds", c.seeds},
                  {"runs", runs},
                  {"mean", {{"final", to_json(mean_final)}, {"best", to_json(mean_best)}}}};
  write_text(out / "summary.json", summary.dump(2) + "\n");
  if (c.seeds.size() > 1) {
    io.out << "mean over " << c.seeds.size() << " seeds, final  ";
    print_report(io.out, mean_final);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct Source {
  RunConfig config;
  std::shared_ptr<const EntityDatabase> db;
  fs::path checkpoint;
  std::optional<fs::path> run_dir;
};

fs::path final_checkpoint(const fs::path& run_dir) {
  const auto report = json::parse(read_text(run_dir / "report.json"));
  return run_dir / report["final"]["checkpoint"].get<std::string>();
}

// Either a run directory (its config snapshot, ontology copy and final
// checkpoint) or an explicit checkpoint plus config flags.
Source open_source(const ConfigArgs& config, const std::string& run, const std::string& ckpt) {
  Source s;
  if (!run.empty()) {
    const fs::path dir(run);
    if (!fs::exists(dir / "config.txt"))
      throw CliError("BadRun", kExitUsage, run + " is not a run directory (no config.txt)");
    s.config = load_config_file(dir / "config.txt");
    const auto ontology = load_ontology_file((dir / "ontology.txt").string());
    s.db = std::make_shared<const EntityDatabase>(EntityDatabase::generate(ontology, s.config.db_seed));
    s.checkpoint = ckpt.empty() ? final_checkpoint(dir) : fs::path(ckpt);
    s.run_dir = dir;
  } else {
    if (ckpt.empty()) throw CliError("MissingCheckpoint", kExitUsage, "pass --checkpoint or --run");
    s.config = config.resolve();
    validate(s.config);
    s.db = make_database(s.config);
    s.checkpoint = ckpt;
  }
  return s;
}

QNetwork load_net(const Source& s) {
  const auto ck = load_checkpoint(s.checkpoint);
  const auto want = expected_shape(*s.db, ck.net.shape().hidden);
  if (ck.net.shape().input != want.input || ck.net.shape().actions != want.actions)
    throw CheckpointError(CheckpointError::Kind::kShapeMismatch,
                          "checkpoint " + s.checkpoint.string() + " expects " +
                              std::to_string(ck.net.shape().input) + " features / " +
                              std::to_string(ck.net.shape().actions) + " actions, the ontology gives " +
                              std::to_string(want.input) + " / " + std::to_string(want.actions));
  return ck.net;
}

struct EvalArgs {
  ConfigArgs config;
  std::string run;
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> episodes;
  std::string report;
};

int eval_cmd(const EvalArgs& a, Streams& io) {
  if (!a.seed) throw CliError("MissingSeed", kExitUsage, "eval needs --seed");
  const auto s = open_source(a.config, a.run, a.checkpoint);
  const std::size_t n = a.episodes.value_or(s.config.eval_episodes);
  if (n == 0) throw CliError("BadEpisodes", kExitUsage, "--episodes must be at least 1");
  const auto net = load_net(s);
  const auto report = evaluate(net, s.db, n, *a.seed);
  print_report(io.out, report);

  std::optional<fs::path> dest;
  if (!a.report.empty()) dest = a.report;
  else if (s.run_dir)
    dest = *s.run_dir / ("eval-seed-" + std::to_string(*a.seed) + "-n-" + std::to_string(n) + ".json");
  if (dest) {
    const json j = {{"checkpoint", s.checkpoint.string()},
                    {"seed", *a.seed},
                    {"episodes", n},
                    {"metrics", to_json(report)}};
    write_text(*dest, j.dump(2) + "\n");
    io.out << "report written to " << dest->string() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ChatArgs {
  ConfigArgs config;
  std::string run;
  std::string checkpoint;
};

int chat_cmd(const ChatArgs& a, Streams& io) {
  const auto s = open_source(a.config, a.run, a.checkpoint);
  ChatSession session(s.db, load_net(s));
  io.out << "dialog-act chat with " << s.checkpoint.string() << "\n" << ChatSession::help();
  std::string line;
  while (!session.finished()) {
    io.out << "user> " << std::flush;
    if (!std::getline(io.in, line)) break;
    io.out << session.handle(line);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrendsArgs {
  std::string run;
  std::string log;
  std::string out;
  std::size_t window = 100;
};

int trends_cmd(const TrendsArgs& a, Streams& io) {
  if (a.run.empty() == a.log.empty())
    throw CliError("BadArgs", kExitUsage, "pass exactly one of --run or --log");
  if (a.window == 0) throw CliError("BadArgs", kExitUsage, "--window must be at least 1");
  const fs::path log = a.run.empty() ? fs::path(a.log) : fs::path(a.run) / "episodes.tsv";
  std::istringstream text(read_text(log));
  std::vector<EpisodeRow> rows;
  try {
    rows = read_episode_log(text);
  } catch (const std::exception& e) {
    throw CliError("BadLog", kExitRuntime, log.string() + ": " + e.what());
  }
  if (a.out.empty()) {
    write_trends(io.out, rows, a.window);
  } else {
    std::ostringstream s;
    write_trends(s, rows, a.window);
    write_text(a.out, s.str());
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err) {
  Streams io{in, out, err};
  CLI::App app{"Dialog policy learning with deep Q-learning from demonstrations", "dqfd"};
  app.require_subcommand(1);

  DemoCollectArgs dc;
  auto* dc_cmd = app.add_subcommand("demo-collect", "Record expert dialogs to a demonstration file");
  add_config_options(dc_cmd, dc.config);
  dc_cmd->add_option("--out", dc.out, "Demonstration file to create")->required();
  dc_cmd->add_option("--episodes", dc.episodes, "Expert episodes (default pretrain_demo_episodes)");
  dc_cmd->add_option("--expert", dc.expert, "rule or weak");
  dc_cmd->add_option("--seed", dc.seed, "Root seed (goal and expert streams match `train`)");

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "Train one run per seed into a new directory");
  add_config_options(tr_cmd, tr.config);
  tr_cmd->add_option("--out", tr.out, "Run directory to create")->required();
  tr_cmd->add_option("--seed", tr.seeds, "Root seed; repeat for a multi-seed run");
  tr_cmd->add_option("--seeds", tr.seeds_list, "Comma-separated seeds");
  tr_cmd->add_option("--demos", tr.demos, "Demonstration file (required for mode dqfd)");
  tr_cmd->add_flag("--quiet", tr.quiet, "No progress lines");

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  add_config_options(ev_cmd, ev.config);
  ev_cmd->add_option("--run", ev.run, "Run directory (uses its final checkpoint)");
  ev_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint file");
  ev_cmd->add_option("--seed", ev.seed, "Evaluation seed");
  ev_cmd->add_option("--episodes", ev.episodes, "Episodes (default eval_episodes)");
  ev_cmd->add_option("--report", ev.report, "Write the report as JSON here");

  ChatArgs ch;
  auto* ch_cmd = app.add_subcommand("chat", "Talk to a policy in dialog acts");
  add_config_options(ch_cmd, ch.config);
  ch_cmd->add_option("--run", ch.run, "Run directory (uses its final checkpoint)");
  ch_cmd->add_option("--checkpoint", ch.checkpoint, "Checkpoint file");

  TrendsArgs tn;
  auto* tn_cmd = app.add_subcommand("trends", "Windowed success rate and dialog length per episode");
  tn_cmd->add_option("--run", tn.run, "Run directory");
  tn_cmd->add_option("--log", tn.log, "Episode log file");
  tn_cmd->add_option("--out", tn.out, "Output file (default stdout)");
  tn_cmd->add_option("--window", tn.window, "Moving-average window in episodes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nrun `dqfd --help` for usage\n";
    return kExitUsage;
  }

  try {
    if (*dc_cmd) return demo_collect(dc, io);
    if (*tr_cmd) return train_cmd(tr, io);
    if (*ev_cmd) return eval_cmd(ev, io);
    if (*ch_cmd) return chat_cmd(ch, io);
    if (*tn_cmd) return trends_cmd(tn, io);
  } catch (const CliError& e) {
    err << "error [" << e.code() << "]: " << e.what() << '\n';
    return e.exit_code();
  } catch (const CheckpointError& e) {
    err << "error [Checkpoint]: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const DemoFileError& e) {
    err << "error [DemoFile]: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  std::vector<const char*> argv{"dqfd"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
}

}  // namespace dqfd::cli
