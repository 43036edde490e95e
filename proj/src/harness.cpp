#include "grue/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <queue>
#include <fstream>
#include <set>
#include <sstream>

#include "grue/admissible.hpp"
#include "json.hpp"

namespace grue {

using nlohmann::json;

const char* agent_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::kA2c: return "a2c";
    case AgentKind::kKgA2c: return "kg-a2c";
    case AgentKind::kA2cChained: return "a2c-chained";
    case AgentKind::kKgA2cChained: return "kg-a2c-chained";
    case AgentKind::kA2cExplore: return "a2c-explore";
    case AgentKind::kKgA2cExplore: return "kg-a2c-explore";
  }
  return "unknown";
}

AgentKind agent_from_name(const std::string& name) {
  for (AgentKind k : {AgentKind::kA2c, AgentKind::kKgA2c, AgentKind::kA2cChained,
                      AgentKind::kKgA2cChained, AgentKind::kA2cExplore, AgentKind::kKgA2cExplore}) {
    if (name == agent_name(k)) return k;
  }
  throw ConfigError("unknown agent: " + name);
}

Variant agent_variant(AgentKind kind) {
  switch (kind) {
    case AgentKind::kKgA2c:
    case AgentKind::kKgA2cChained:
    case AgentKind::kKgA2cExplore:
      return Variant::kWithKg;
    default:
      return Variant::kTextOnly;
  }
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (step_budget <= 0) throw ConfigError("step_budget must be positive");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (buffer_capacity < 1) throw ConfigError("buffer_capacity must be >= 1");
  if (cell_step_size < 1) throw ConfigError("cell_step_size must be >= 1");
  training(true).validate();
  training(false).validate();
}

std::uint64_t ExperimentConfig::digest() const {
  Hasher h;
  h.mix(world_text);
  h.mix(agent_name(agent));
  h.mix_u64(seeds.size());
  for (std::uint64_t s : seeds) h.mix_u64(s);
  h.mix_i64(step_budget);
  h.mix_u32(static_cast<std::uint32_t>(patience));
  h.mix_u32(static_cast<std::uint32_t>(buffer_capacity));
  h.mix_u32(static_cast<std::uint32_t>(batch_size_chained));
  h.mix_u32(static_cast<std::uint32_t>(batch_size_explore));
  h.mix_u32(static_cast<std::uint32_t>(cell_step_size));
  for (double v : {forced_explore_prob, learning_rate, discount, entropy_coef, value_coef}) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    h.mix_u64(bits);
  }
  h.mix_u32(static_cast<std::uint32_t>(bow_dim));
  h.mix_u32(static_cast<std::uint32_t>(max_episode_steps));
  h.mix_i64(bottleneck_score);
  return h.digest();
}

TrainingConfig ExperimentConfig::training(bool chained) const {
  TrainingConfig t;
  t.learning_rate = learning_rate;
  t.discount = discount;
  t.entropy_coef = entropy_coef;
  t.value_coef = value_coef;
  t.batch_size = chained ? batch_size_chained : batch_size_explore;
  t.max_episode_steps = max_episode_steps;
  return t;
}

ExperimentConfig load_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  c.world_path = doc.value("world", std::string());
  if (doc.contains("agent")) c.agent = agent_from_name(doc.at("agent").get<std::string>());
  if (doc.contains("seeds")) {
    c.seeds.clear();
    for (const json& s : doc.at("seeds")) c.seeds.push_back(s.get<std::uint64_t>());
  }
  c.step_budget = doc.value("step_budget", c.step_budget);
  c.patience = doc.value("patience", c.patience);
  c.buffer_capacity = doc.value("buffer_size", c.buffer_capacity);
  c.batch_size_chained = doc.value("batch_size_chained", c.batch_size_chained);
  c.batch_size_explore = doc.value("batch_size_explore", c.batch_size_explore);
  c.cell_step_size = doc.value("cell_step_size", c.cell_step_size);
  c.forced_explore_prob = doc.value("forced_explore_prob", c.forced_explore_prob);
  c.learning_rate = doc.value("learning_rate", c.learning_rate);
  c.discount = doc.value("discount", c.discount);
  c.entropy_coef = doc.value("entropy_coef", c.entropy_coef);
  c.value_coef = doc.value("value_coef", c.value_coef);
  c.bow_dim = doc.value("bow_dim", c.bow_dim);
  c.max_episode_steps = doc.value("max_episode_steps", c.max_episode_steps);
  c.bottleneck_score = doc.value("bottleneck_score", c.bottleneck_score);
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

double asymptotic_score(const std::vector<std::int64_t>& series) {
  if (series.empty()) return 0.0;
  std::size_t tail = std::max<std::size_t>(1, series.size() / 10);
  double sum = 0.0;
  for (std::size_t i = series.size() - tail; i < series.size(); ++i)
    sum += static_cast<double>(series[i]);
  return sum / static_cast<double>(tail);
}

PlainRunResult train_plain(const WorldSpec& world, const AgentSpec& spec,
                           const TrainingConfig& config, Variant variant, std::uint64_t seed,
                           std::int64_t step_budget, const PolicyParams* initial) {
  config.validate();
  PlainRunResult result;
  result.params = initial ? *initial : PolicyParams::zeros(spec);
  Rng rng(splitmix64(seed ^ 0xa2c0ull));
  std::deque<TrajectoryStep> pending;
  const std::int64_t top = world.max_score();
  std::int64_t env_steps = 0;
  std::int64_t best = 0;
  bool has_best = false;
  int episode = 0;

  auto flush_full_batches = [&]() {
    while (pending.size() >= static_cast<std::size_t>(config.batch_size)) {
      std::vector<TrajectoryStep> batch(pending.begin(), pending.begin() + config.batch_size);
      double bootstrap = 0.0;
      if (pending.size() > static_cast<std::size_t>(config.batch_size))
        bootstrap = pending[static_cast<std::size_t>(config.batch_size)].value;
      else if (!batch.back().done)
        bootstrap = batch.back().value;
      a2c_update(result.params, batch, bootstrap, config);
      pending.erase(pending.begin(), pending.begin() + config.batch_size);
    }
  };

  while (env_steps < step_budget) {
    episode += 1;
    EpisodeOptions options;
    EpisodeResult ep = run_episode(world, spec, result.params, variant, config, options, rng);
    env_steps += ep.env_steps;
    for (TrajectoryStep& s : ep.steps) pending.push_back(std::move(s));
    flush_full_batches();

    EpisodeRecord rec;
    rec.episode = episode;
    rec.steps = static_cast<int>(ep.actions_from_reset.size());
    rec.score = ep.final_score;
    rec.event = "continue";
    if (!has_best || ep.final_score > best) {
      best = ep.final_score;
      has_best = true;
      rec.event = "improve";
    }
    if (top > 0 && best >= top) {
      rec.event = "terminate";
      result.log.push_back(rec);
      result.termination = "max_score";
      break;
    }
    result.log.push_back(rec);
  }
  if (!pending.empty()) {
    std::vector<TrajectoryStep> batch(pending.begin(), pending.end());
    double bootstrap = batch.back().done ? 0.0 : batch.back().value;
    a2c_update(result.params, batch, bootstrap, config);
  }
  if (result.termination.empty()) result.termination = "budget";
  result.best_score = best;
  result.total_env_steps = env_steps;
  return result;
}

namespace {

std::string episode_record_json(const EpisodeRecord& rec) {
  json j;
  j["episode"] = rec.episode;
  j["steps"] = rec.steps;
  j["score"] = rec.score;
  j["segment"] = rec.segment;
  j["backtrack_depth"] = rec.backtrack_depth;
  j["event"] = rec.event;
  return j.dump();
}

std::string expansion_record_json(const ExpansionRecord& rec) {
  json j;
  j["expansion"] = rec.expansion;
  j["env_steps"] = rec.env_steps;
  j["best_score"] = rec.best_score;
  j["rollout_score"] = rec.rollout_score;
  j["cells"] = rec.cells;
  j["new_cells"] = rec.new_cells;
  return j.dump();
}

}  // namespace

RunRecord run_seed(const ExperimentConfig& config, const WorldSpec& world, std::uint64_t seed) {
  RunRecord rec;
  rec.config_digest = config.digest();
  rec.agent = config.agent;
  rec.seed = seed;
  const AgentSpec spec = AgentSpec::make(world, config.bow_dim);
  const Variant variant = agent_variant(config.agent);
  const auto t0 = std::chrono::steady_clock::now();

  switch (config.agent) {
    case AgentKind::kA2c:
    case AgentKind::kKgA2c: {
      PlainRunResult r = train_plain(world, spec, config.training(true), variant, seed,
                                     config.step_budget);
      for (const EpisodeRecord& e : r.log) {
        rec.series.push_back(e.score);
        rec.log_lines.push_back(episode_record_json(e));
      }
      rec.terminal_event = r.termination;
      rec.total_env_steps = r.total_env_steps;
      rec.final_params = std::move(r.params);
      break;
    }
    case AgentKind::kA2cChained:
    case AgentKind::kKgA2cChained: {
      ChainConfig cc;
      cc.train = config.training(true);
      cc.patience = config.patience;
      cc.buffer_capacity = config.buffer_capacity;
      cc.forced_explore_prob = config.forced_explore_prob;
      cc.step_budget = config.step_budget;
      ChainRunResult r = train_chained(world, spec, cc, variant, seed);
      for (const EpisodeRecord& e : r.log) {
        rec.series.push_back(e.score);
        rec.log_lines.push_back(episode_record_json(e));
      }
      rec.terminal_event = r.termination;
      rec.total_env_steps = r.total_env_steps;
      rec.final_params = std::move(r.chain.active);
      break;
    }
    case AgentKind::kA2cExplore:
    case AgentKind::kKgA2cExplore: {
      GoExploreConfig gc;
      gc.train = config.training(false);
      gc.cell_step_size = config.cell_step_size;
      gc.step_budget = config.step_budget;
      GoExploreResult r = train_goexplore(world, spec, gc, variant, seed);
      for (const ExpansionRecord& e : r.log) {
        rec.series.push_back(e.best_score);
        rec.log_lines.push_back(expansion_record_json(e));
      }
      rec.terminal_event = r.termination;
      rec.total_env_steps = r.total_env_steps;
      rec.final_params = std::move(r.params);
      break;
    }
  }

  rec.max_score = 0;
  for (std::int64_t s : rec.series) rec.max_score = std::max(rec.max_score, s);
  rec.asymptotic_score = asymptotic_score(rec.series);
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const WorldSpec world = load_world(config.world_text);
  std::vector<RunRecord> records(config.seeds.size());
  const int n = static_cast<int>(config.seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    records[static_cast<std::size_t>(i)] =
        run_seed(config, world, config.seeds[static_cast<std::size_t>(i)]);
  }
  return records;
}

std::string report_table(const std::vector<RunRecord>& records, std::int64_t bottleneck_score) {
  std::ostringstream out;
  out << "agent,runs,mean_asymptotic_reward,std,pass_rate\n";
  for (AgentKind kind : {AgentKind::kA2c, AgentKind::kKgA2c, AgentKind::kA2cChained,
                         AgentKind::kKgA2cChained, AgentKind::kA2cExplore,
                         AgentKind::kKgA2cExplore}) {
    std::vector<const RunRecord*> group;
    for (const RunRecord& r : records)
      if (r.agent == kind) group.push_back(&r);
    if (group.empty()) continue;
    double mean = 0.0;
    for (const RunRecord* r : group) mean += r->asymptotic_score;
    mean /= static_cast<double>(group.size());
    double var = 0.0;
    for (const RunRecord* r : group)
      var += (r->asymptotic_score - mean) * (r->asymptotic_score - mean);
    var /= static_cast<double>(group.size());
    int passed = 0;
    for (const RunRecord* r : group)
      if (r->max_score > bottleneck_score) ++passed;
    out << agent_name(kind) << "," << group.size() << "," << mean << "," << std::sqrt(var) << ","
        << static_cast<double>(passed) / static_cast<double>(group.size()) << "\n";
  }
  return out.str();
}

std::string curve_csv(const RunRecord& record) {
  std::ostringstream out;
  out << "index,score\n";
  for (std::size_t i = 0; i < record.series.size(); ++i)
    out << i + 1 << "," << record.series[i] << "\n";
  return out.str();
}

ValidationReport validate_world(const std::string& world_text, int max_states) {
  ValidationReport report;
  WorldSpec world;
  try {
    world = load_world(world_text);
  } catch (const WorldError& e) {
    report.errors.push_back(e.what());
    return report;
  }

  // Brute-force reachability over the admissible-action graph. Highest
  // score first, so reachable rewards are confirmed early and the search
  // can stop before exhausting the cap.
  std::set<std::uint64_t> visited;
  std::set<int> fired;
  auto by_score = [](const GameState& a, const GameState& b) { return a.score < b.score; };
  std::priority_queue<GameState, std::vector<GameState>, decltype(by_score)> frontier(by_score);
  auto [start, obs0] = engine::reset(world);
  (void)obs0;
  visited.insert(engine::state_hash(start));
  frontier.push(std::move(start));
  while (!frontier.empty() && static_cast<int>(visited.size()) < max_states &&
         fired.size() < world.rewards.size()) {
    GameState state = frontier.top();
    frontier.pop();
    for (const TemplateAction& action : admissible_actions(world, state)) {
      auto [next, obs] = engine::step(world, state, action);
      (void)obs;
      for (int idx : next.fired_rewards) fired.insert(idx);
      std::uint64_t h = engine::state_hash(next);
      if (!engine::is_done(world, next) && visited.insert(h).second)
        frontier.push(std::move(next));
    }
  }
  for (std::size_t i = 0; i < world.rewards.size(); ++i) {
    if (!fired.count(static_cast<int>(i)))
      report.warnings.push_back("reward '" + world.rewards[i].id +
                                "' was not reached by exhaustive search");
  }
  return report;
}

}  // namespace grue
