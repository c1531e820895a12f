#include "dqfd/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dqfd/checkpoint.hpp"
#include "dqfd/featurizer.hpp"

namespace dqfd {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(std::int64_t v) { return std::to_string(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw std::invalid_argument("config: " + key + " expects a number, got '" + text + "'");
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
  std::int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw std::invalid_argument("config: " + key + " expects an integer, got '" + text + "'");
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const auto v = parse_int(key, text);
  if (v < 0) throw std::invalid_argument("config: " + key + " must be non-negative");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("config: " + key + " expects true/false, got '" + text + "'");
}

struct RoundStats {
  double mean = 0.0;
  double std = 0.0;
};

RoundStats run_round(Agent& agent, std::int64_t steps, Rng& replay_rng, std::int64_t frame) {
  agent.sync_target();
  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t k = 0; k < steps; ++k) {
    const double l = agent.train_step(replay_rng, frame).loss;
    sum += l;
    sum_sq += l * l;
  }
  if (steps == 0) return {};
  const double n = static_cast<double>(steps);
  const double mean = sum / n;
  return {mean, std::sqrt(std::max(0.0, sum_sq / n - mean * mean))};
}

}  // namespace

void write_episode_row(std::ostream& out, const EpisodeRow& row) {
  out << row.frame << '\t' << row.episode << '\t' << row.phase << '\t' << fmt(row.ret) << '\t'
      << row.turns << '\t' << (row.success ? 1 : 0) << '\t' << fmt(row.epsilon) << '\t'
      << fmt(row.loss_mean) << '\t' << fmt(row.loss_std) << '\n';
}

std::vector<EpisodeRow> read_episode_log(std::istream& in) {
  std::vector<EpisodeRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (line != kEpisodeLogHeader) throw std::runtime_error("episode log: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::vector<std::string> f;
    std::string cell;
    while (std::getline(fields, cell, '\t')) f.push_back(cell);
    if (f.size() != 9) throw std::runtime_error("episode log: malformed row '" + line + "'");
    EpisodeRow r;
    r.frame = parse_int("frame", f[0]);
    r.episode = parse_int("episode", f[1]);
    r.phase = f[2];
    r.ret = parse_double("return", f[3]);
    r.turns = static_cast<int>(parse_int("turns", f[4]));
    r.success = parse_int("success", f[5]) != 0;
    r.epsilon = parse_double("epsilon", f[6]);
    r.loss_mean = parse_double("loss_mean", f[7]);
    r.loss_std = parse_double("loss_std", f[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<std::pair<std::string, std::string>> describe(const AgentConfig& c) {
  return {
      {"mode", mode_name(c.mode)},
      {"gamma", fmt(c.gamma)},
      {"eps_start", fmt(c.eps_start)},
      {"eps_end", fmt(c.eps_end)},
      {"eps_decay_frames", fmt(c.eps_decay_frames)},
      {"total_frames", fmt(c.total_frames)},
      {"train_every", fmt(c.train_every)},
      {"batches_per_round", fmt(c.batches_per_round)},
      {"batch_size", fmt(c.batch_size)},
      {"tau", fmt(c.tau)},
      {"margin_weight", fmt(c.margin_weight)},
      {"l2", fmt(c.l2)},
      {"hidden", fmt(c.hidden)},
      {"pretrain_demo_episodes", fmt(c.pretrain_demo_episodes)},
      {"pretrain_gradient_steps", fmt(c.pretrain_gradient_steps)},
      {"pretrain_train_while_collecting", fmt(c.pretrain_train_while_collecting)},
      {"demo_source", c.demo_source.type == ExpertKind::Type::kRule ? "rule" : "weak"},
      {"error_rate", fmt(c.demo_source.error_rate)},
      {"checkpoint_every", fmt(c.checkpoint_every)},
      {"lr", fmt(c.optimizer.lr)},
      {"beta1", fmt(c.optimizer.beta1)},
      {"beta2", fmt(c.optimizer.beta2)},
      {"adam_eps", fmt(c.optimizer.eps)},
      {"rectify_threshold", fmt(c.optimizer.rectify_threshold)},
      {"lr_step_frames", fmt(c.lr_schedule.step_frames)},
      {"lr_decay", fmt(c.lr_schedule.factor)},
      {"replay_capacity", fmt(c.replay.capacity)},
      {"alpha", fmt(c.replay.alpha)},
      {"beta", fmt(c.replay.beta)},
      {"eps_p", fmt(c.replay.eps_p)},
      {"eps_d", fmt(c.replay.eps_d)},
      {"stratified", fmt(c.replay.stratified)},
  };
}

bool assign(AgentConfig& c, const std::string& key, const std::string& v) {
  if (key == "mode") c.mode = parse_mode(v);
  else if (key == "gamma") c.gamma = parse_double(key, v);
  else if (key == "eps_start") c.eps_start = parse_double(key, v);
  else if (key == "eps_end") c.eps_end = parse_double(key, v);
  else if (key == "eps_decay_frames") c.eps_decay_frames = parse_int(key, v);
  else if (key == "total_frames") c.total_frames = parse_int(key, v);
  else if (key == "train_every") c.train_every = parse_int(key, v);
  else if (key == "batches_per_round") c.batches_per_round = parse_int(key, v);
  else if (key == "batch_size") c.batch_size = parse_count(key, v);
  else if (key == "tau") c.tau = parse_double(key, v);
  else if (key == "margin_weight") c.margin_weight = parse_double(key, v);
  else if (key == "l2") c.l2 = parse_double(key, v);
  else if (key == "hidden") c.hidden = parse_count(key, v);
  else if (key == "pretrain_demo_episodes") c.pretrain_demo_episodes = parse_count(key, v);
  else if (key == "pretrain_gradient_steps") c.pretrain_gradient_steps = parse_int(key, v);
  else if (key == "pretrain_train_while_collecting") c.pretrain_train_while_collecting = parse_bool(key, v);
  else if (key == "demo_source") {
    if (v == "rule") c.demo_source = ExpertKind{ExpertKind::Type::kRule, c.demo_source.error_rate};
    else if (v == "weak") c.demo_source.type = ExpertKind::Type::kWeak;
    else throw std::invalid_argument("config: demo_source expects rule or weak, got '" + v + "'");
  } else if (key == "error_rate") c.demo_source.error_rate = parse_double(key, v);
  else if (key == "checkpoint_every") c.checkpoint_every = parse_int(key, v);
  else if (key == "lr") c.optimizer.lr = parse_double(key, v);
  else if (key == "beta1") c.optimizer.beta1 = parse_double(key, v);
  else if (key == "beta2") c.optimizer.beta2 = parse_double(key, v);
  else if (key == "adam_eps") c.optimizer.eps = parse_double(key, v);
  else if (key == "rectify_threshold") c.optimizer.rectify_threshold = parse_double(key, v);
  else if (key == "lr_step_frames") c.lr_schedule.step_frames = parse_int(key, v);
  else if (key == "lr_decay") c.lr_schedule.factor = parse_double(key, v);
  else if (key == "replay_capacity") c.replay.capacity = parse_count(key, v);
  else if (key == "alpha") c.replay.alpha = parse_double(key, v);
  else if (key == "beta") c.replay.beta = parse_double(key, v);
  else if (key == "eps_p") c.replay.eps_p = parse_double(key, v);
  else if (key == "eps_d") c.replay.eps_d = parse_double(key, v);
  else if (key == "stratified") c.replay.stratified = parse_bool(key, v);
  else return false;
  return true;
}

DemoSet collect_demonstrations(DialogEnv& env, const Policy& expert, std::size_t episodes,
                               Rng& goal_rng, std::vector<EpisodeRow>* rows) {
  const auto& ontology = env.database().ontology();
  const FeatureLayout layout(ontology);
  DemoSet demos;
  demos.vector_length = static_cast<std::uint32_t>(layout.size());
  demos.action_count = static_cast<std::uint32_t>(env.actions().size());
  std::int64_t frame = rows && !rows->empty() ? rows->back().frame : 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    env.reset(goal_rng);
    FeatureVector x = featurize(env.state(), ontology, layout);
    EnvStepResult step;
    do {
      const std::size_t a = expert(env.state(), x);
      step = env.step(a);
      FeatureVector x_next = featurize(env.state(), ontology, layout);
      demos.transitions.push_back(Transition{std::move(x), static_cast<std::uint32_t>(a),
                                             step.reward, x_next, step.done, true});
      x = std::move(x_next);
      ++frame;
    } while (!step.done);
    if (rows) {
      EpisodeRow row;
      row.frame = frame;
      row.episode = static_cast<std::int64_t>(rows->size()) + 1;
      row.phase = "demo";
      row.ret = env.episode_return();
      row.turns = env.state().turn;
      row.success = step.success.value_or(false);
      rows->push_back(row);
    }
  }
  return demos;
}

std::vector<EpisodeRow> demo_episode_rows(const std::vector<Transition>& transitions) {
  std::vector<EpisodeRow> rows;
  EpisodeRow cur;
  std::int64_t frame = 0;
  for (const auto& t : transitions) {
    ++frame;
    cur.ret += t.r;
    cur.turns += 1;
    if (!t.terminal) continue;
    cur.frame = frame;
    cur.episode = static_cast<std::int64_t>(rows.size()) + 1;
    cur.phase = "demo";
    cur.success = t.r > 0.0;
    rows.push_back(cur);
    cur = EpisodeRow{};
  }
  return rows;
}

void pretrain(Agent& agent, const std::vector<Transition>& demos, Rng& replay_rng,
              std::int64_t frame) {
  for (const auto& t : demos) {
    Transition d = t;
    d.is_demo = true;
    agent.buffer().push(std::move(d));
  }
  const auto& c = agent.config();
  if (agent.buffer().size() == 0) return;
  std::int64_t done = 0;
  while (done < c.pretrain_gradient_steps) {
    const std::int64_t steps =
        std::min<std::int64_t>(std::max<std::int64_t>(c.batches_per_round, 1),
                               c.pretrain_gradient_steps - done);
    run_round(agent, steps, replay_rng, frame);
    done += steps;
  }
}

RunArtifacts train(const AgentConfig& config, const TrainOptions& options) {
  config.validate();
  if (!options.db) throw std::invalid_argument("train: no database");
  const auto& ontology = options.db->ontology();
  const FeatureLayout layout(ontology);
  DialogEnv env(options.db, options.sim);

  Rng init_rng = derive_rng(options.seed, 1);
  Rng goal_rng = derive_rng(options.seed, 2);
  Rng explore_rng = derive_rng(options.seed, 3);
  Rng replay_rng = derive_rng(options.seed, 4);
  Rng expert_rng = derive_rng(options.seed, 5);

  Agent agent(layout.size(), env.actions().size(), config, init_rng);
  RunArtifacts run;
  run.metadata = describe(config);
  run.metadata.emplace_back("seed", std::to_string(options.seed));
  run.metadata.emplace_back("features", std::to_string(layout.size()));
  run.metadata.emplace_back("actions", std::to_string(env.actions().size()));

  std::ofstream log;
  if (options.run_dir) {
    std::filesystem::create_directories(*options.run_dir / "checkpoints");
    std::ofstream meta(*options.run_dir / "metadata.txt");
    for (const auto& [k, v] : run.metadata) meta << k << " = " << v << '\n';
    log.open(*options.run_dir / "episodes.tsv");
    log << kEpisodeLogHeader << '\n';
  }
  auto emit = [&](const EpisodeRow& row) {
    run.episodes.push_back(row);
    if (log.is_open()) {
      write_episode_row(log, row);
      log.flush();
    }
    if (options.on_episode) options.on_episode(row);
  };
  auto checkpoint = [&](std::int64_t frame) {
    run.checkpoints.push_back({frame, agent.online()});
    if (options.run_dir) {
      CheckpointMeta meta{frame, {}};
      for (const auto& [k, v] : run.metadata) meta.info[k] = v;
      save_checkpoint(*options.run_dir / "checkpoints" / ("frame-" + std::to_string(frame) + ".ckpt"),
                      agent.online(), meta);
    }
  };

  std::int64_t frame = 0;
  RoundStats last_round;

  if (config.mode == Mode::kDqfd) {
    std::vector<Transition> demos;
    if (options.demos) {
      if (options.demos->vector_length != layout.size() ||
          options.demos->action_count != env.actions().size())
        throw DemoFileError(DemoFileError::Kind::kShapeMismatch,
                            "demonstrations do not match the ontology's shape");
      demos = options.demos->transitions;
    } else if (config.pretrain_demo_episodes > 0) {
      const Policy expert = make_expert_policy(config.demo_source, env.actions(), options.db,
                                               expert_rng);
      demos = collect_demonstrations(env, expert, config.pretrain_demo_episodes, goal_rng).transitions;
    }
    for (const auto& row : demo_episode_rows(demos)) emit(row);
    run.demo_frames = static_cast<std::int64_t>(demos.size());

    if (config.pretrain_train_while_collecting) {
      for (std::size_t k = 0; k < demos.size(); ++k) {
        Transition d = demos[k];
        d.is_demo = true;
        agent.buffer().push(std::move(d));
        if ((k + 1) % static_cast<std::size_t>(config.train_every) == 0)
          last_round = run_round(agent, config.batches_per_round, replay_rng,
                                 static_cast<std::int64_t>(k + 1));
      }
    } else {
      pretrain(agent, demos, replay_rng, run.demo_frames);
    }
    frame = run.demo_frames;
  }

  std::int64_t agent_frames = 0;
  std::int64_t episode = static_cast<std::int64_t>(run.episodes.size());
  while (frame < config.total_frames) {
    env.reset(goal_rng);
    FeatureVector x = featurize(env.state(), ontology, layout);
    const double eps0 = epsilon_at(agent_frames, config);
    EnvStepResult step;
    do {
      const double eps = epsilon_at(agent_frames, config);
      const std::size_t a = agent.act(x, eps, explore_rng);
      step = env.step(a);
      FeatureVector x_next = featurize(env.state(), ontology, layout);
      agent.buffer().push(Transition{std::move(x), static_cast<std::uint32_t>(a), step.reward,
                                     x_next, step.done, false});
      x = std::move(x_next);
      ++frame;
      ++agent_frames;
      if (agent_frames % config.train_every == 0 &&
          agent.buffer().size() >= config.batch_size)
        last_round = run_round(agent, config.batches_per_round, replay_rng, frame);
      if (frame % config.checkpoint_every == 0) checkpoint(frame);
    } while (!step.done);

    EpisodeRow row;
    row.frame = frame;
    row.episode = ++episode;
    row.phase = "agent";
    row.ret = env.episode_return();
    row.turns = env.state().turn;
    row.success = step.success.value_or(false);
    row.epsilon = eps0;
    row.loss_mean = last_round.mean;
    row.loss_std = last_round.std;
    emit(row);
  }
  if (run.checkpoints.empty() || run.checkpoints.back().frame != frame) checkpoint(frame);
  run.final_net = agent.online();
  return run;
}

}  // namespace dqfd
