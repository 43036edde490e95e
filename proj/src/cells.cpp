#include "grue/cells.hpp"

#include <algorithm>
#include <sstream>

#include "grue/bytes.hpp"
#include "grue/hash.hpp"

namespace grue {

namespace {
constexpr std::uint8_t kArchiveBlobVersion = 1;
}

std::uint64_t cell_key(const KnowledgeGraph& graph, const GameState& state,
                       const std::string& observation, Variant variant) {
  if (variant == Variant::kTextOnly) return fnv1a64(observation);
  return hash_combine(kg::canonical_hash(graph), engine::state_hash(state));
}

bool Archive::insert_or_update(std::uint64_t key, std::int64_t score,
                               const std::vector<TemplateAction>& trajectory,
                               std::int64_t discovery_step, const GameState* state,
                               const KnowledgeGraph* graph, const std::string* observation) {
  global_best = std::max(global_best, score);
  auto set_cache = [&](Cell& c) {
    if (!state || !graph || !observation) return;
    c.has_cache = true;
    c.cached_blob = engine::snapshot(*state);
    c.cached_graph = *graph;
    c.cached_observation = *observation;
  };
  auto it = cells_.find(key);
  if (it == cells_.end()) {
    Cell c;
    c.key = key;
    c.best_score = score;
    c.trajectory = trajectory;
    c.discovery_step = discovery_step;
    set_cache(c);
    cells_.emplace(key, std::move(c));
    order_.push_back(key);
    return true;
  }
  Cell& c = it->second;
  if (score > c.best_score ||
      (score == c.best_score && trajectory.size() < c.trajectory.size())) {
    c.best_score = score;
    c.trajectory = trajectory;
    set_cache(c);
  }
  return false;
}

const Cell& select_cell(const Archive& archive, Rng& rng) {
  if (archive.size() == 0) throw ArchiveFault("select_cell on an empty archive");
  std::int64_t min_score = archive.at(archive.keys().front()).best_score;
  for (std::uint64_t k : archive.keys())
    min_score = std::min(min_score, archive.at(k).best_score);
  double total = 0.0;
  for (std::uint64_t k : archive.keys())
    total += static_cast<double>(archive.at(k).best_score - min_score + 1);
  double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::uint64_t k : archive.keys()) {
    acc += static_cast<double>(archive.at(k).best_score - min_score + 1);
    if (u < acc) return archive.at(k);
  }
  return archive.at(archive.keys().back());
}

ExpandStats expand_cell(Archive& archive, std::uint64_t key, PolicyParams& params,
                        const WorldSpec& world, const AgentSpec& spec, Variant variant,
                        const GoExploreConfig& config, Rng& rng, std::int64_t env_step_base) {
  if (!archive.contains(key)) throw ArchiveFault("expand_cell: unknown key");
  ExpandStats stats;
  const std::vector<TemplateAction> base_trajectory = archive.at(key).trajectory;
  const std::int64_t base_score = archive.at(key).best_score;

  // Restore from the cache when present; otherwise replay the trajectory
  // from reset, rebuilding the knowledge graph alongside, and verify it.
  GameState state;
  Observation obs;
  KnowledgeGraph graph;
  if (archive.at(key).has_cache) {
    const Cell& cell = archive.at(key);
    state = engine::restore(cell.cached_blob);
    graph = cell.cached_graph;
    obs.text = cell.cached_observation;
    obs.score = state.score;
  } else {
    auto [s0, o0] = engine::reset(world);
    state = std::move(s0);
    obs = std::move(o0);
    graph = kg::update_graph({}, obs.text, std::nullopt, world, state);
    for (const TemplateAction& action : base_trajectory) {
      if (engine::is_done(world, state))
        throw ArchiveFault("replay divergence: trajectory hit a terminal state");
      auto [next, o] = engine::step(world, state, action);
      state = std::move(next);
      obs = std::move(o);
      graph = kg::update_graph(graph, obs.text, action, world, state);
      stats.env_steps += 1;
    }
    if (cell_key(graph, state, obs.text, variant) != key || state.score != base_score)
      throw ArchiveFault("replay divergence: cell key or score not reproduced");
    Cell& cell = archive.at(key);
    cell.has_cache = true;
    cell.cached_blob = engine::snapshot(state);
    cell.cached_graph = graph;
    cell.cached_observation = obs.text;
  }

  // Fixed-length policy rollout; every visited live state becomes a cell.
  std::vector<TrajectoryStep> rollout;
  std::vector<TemplateAction> actions = base_trajectory;
  for (int i = 0; i < config.cell_step_size && !engine::is_done(world, state); ++i) {
    std::vector<double> features = encode_state(world, spec, obs.text, graph, state, variant);
    const GraphMask mask = kg::graph_mask(graph, world.vocab);
    std::vector<int> candidates = fill_candidates(spec, mask, variant);
    ActResult r = act(params, features, candidates, world.templates, rng);

    TrajectoryStep step;
    step.features = std::move(features);
    step.fill_candidates = std::move(candidates);
    step.action = r.action;
    step.template_logp = r.template_logp;
    step.fill_logps = r.fill_logps;
    step.value = r.value;

    auto [next, o] = engine::step(world, state, r.action);
    step.reward = static_cast<double>(o.reward_delta);
    step.done = o.done;
    state = std::move(next);
    obs = std::move(o);
    graph = kg::update_graph(graph, obs.text, r.action, world, state);
    actions.push_back(r.action);
    stats.env_steps += 1;
    rollout.push_back(std::move(step));

    archive.global_best = std::max(archive.global_best, state.score);
    if (!engine::is_done(world, state)) {
      std::uint64_t k = cell_key(graph, state, obs.text, variant);
      std::int64_t before = archive.contains(k) ? archive.at(k).best_score : -1;
      bool inserted = archive.insert_or_update(k, state.score, actions,
                                               env_step_base + stats.env_steps, &state, &graph,
                                               &obs.text);
      if (inserted)
        stats.new_cells += 1;
      else if (archive.at(k).best_score != before)
        stats.updated_cells += 1;
    }
  }

  if (!rollout.empty()) {
    double bootstrap = 0.0;
    if (!rollout.back().done) {
      std::vector<double> final_features =
          encode_state(world, spec, obs.text, graph, state, variant);
      double v = 0.0;
      for (std::size_t i = 0; i < final_features.size(); ++i)
        v += params.w_value[i] * final_features[i];
      bootstrap = v;
    }
    a2c_update(params, rollout, bootstrap, config.train);
  }

  archive.at(key).visits += 1;
  archive.expansions += 1;
  stats.rollout_final_score = state.score;
  return stats;
}

GoExploreResult train_goexplore(const WorldSpec& world, const AgentSpec& spec,
                                const GoExploreConfig& config, Variant variant,
                                std::uint64_t seed) {
  config.train.validate();
  GoExploreResult result;
  result.params = PolicyParams::zeros(spec);
  Rng rng(splitmix64(seed ^ 0x90ec5b0e5ull));

  auto [state, obs] = engine::reset(world);
  KnowledgeGraph graph = kg::update_graph({}, obs.text, std::nullopt, world, state);
  result.archive.insert_or_update(cell_key(graph, state, obs.text, variant), state.score, {}, 0,
                                  &state, &graph, &obs.text);

  std::int64_t env_steps = 0;
  const std::int64_t top = world.max_score();
  int expansion = 0;
  while (env_steps < config.step_budget) {
    if (top > 0 && result.archive.global_best >= top) {
      result.termination = "max_score";
      break;
    }
    expansion += 1;
    const Cell& cell = select_cell(result.archive, rng);
    ExpandStats stats = expand_cell(result.archive, cell.key, result.params, world, spec,
                                    variant, config, rng, env_steps);
    env_steps += stats.env_steps;

    ExpansionRecord rec;
    rec.expansion = expansion;
    rec.env_steps = env_steps;
    rec.best_score = result.archive.global_best;
    rec.rollout_score = stats.rollout_final_score;
    rec.cells = result.archive.size();
    rec.new_cells = stats.new_cells;
    result.log.push_back(rec);
  }
  if (result.termination.empty())
    result.termination = (top > 0 && result.archive.global_best >= top) ? "max_score" : "budget";
  result.total_env_steps = env_steps;
  return result;
}

std::vector<std::uint8_t> save_archive(const Archive& archive, Variant variant) {
  ByteWriter w;
  w.u8(kArchiveBlobVersion);
  w.u8(static_cast<std::uint8_t>(variant));
  w.i64(archive.global_best);
  w.u64(archive.expansions);
  w.u64(archive.size());
  for (std::uint64_t key : archive.keys()) {
    const Cell& c = archive.at(key);
    w.u64(c.key);
    w.i64(c.best_score);
    w.u64(c.visits);
    w.i64(c.discovery_step);
    w.u32(static_cast<std::uint32_t>(c.trajectory.size()));
    for (const TemplateAction& a : c.trajectory) {
      w.u32(static_cast<std::uint32_t>(a.template_id));
      w.u8(static_cast<std::uint8_t>(a.fills.size()));
      for (int f : a.fills) w.u32(static_cast<std::uint32_t>(f));
    }
  }
  return w.take();
}

std::pair<Archive, Variant> load_archive(const std::vector<std::uint8_t>& blob) {
  ByteReader r(blob);
  if (r.u8() != kArchiveBlobVersion) throw DecodeError("unsupported archive blob version");
  Variant variant = static_cast<Variant>(r.u8());
  Archive archive;
  archive.global_best = r.i64();
  archive.expansions = r.u64();
  std::uint64_t n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    Cell c;
    c.key = r.u64();
    c.best_score = r.i64();
    c.visits = r.u64();
    c.discovery_step = r.i64();
    std::uint32_t len = r.u32();
    for (std::uint32_t j = 0; j < len; ++j) {
      TemplateAction a;
      a.template_id = static_cast<int>(r.u32());
      std::uint8_t fills = r.u8();
      for (std::uint8_t k = 0; k < fills; ++k) a.fills.push_back(static_cast<int>(r.u32()));
      c.trajectory.push_back(std::move(a));
    }
    std::int64_t best = c.best_score;
    std::uint64_t visits = c.visits;
    std::int64_t disc = c.discovery_step;
    archive.insert_or_update(c.key, c.best_score, c.trajectory, c.discovery_step);
    archive.at(c.key).visits = visits;
    archive.at(c.key).discovery_step = disc;
    archive.at(c.key).best_score = best;
  }
  r.expect_end();
  return {std::move(archive), variant};
}

std::string inspect_archive(const Archive& archive, const WorldSpec& world) {
  std::vector<std::uint64_t> keys = archive.keys();
  std::sort(keys.begin(), keys.end(), [&](std::uint64_t a, std::uint64_t b) {
    const Cell& ca = archive.at(a);
    const Cell& cb = archive.at(b);
    if (ca.best_score != cb.best_score) return ca.best_score > cb.best_score;
    return ca.key < cb.key;
  });
  std::ostringstream out;
  out << "key\tscore\tsteps\tvisits\tlast_action\n";
  for (std::uint64_t k : keys) {
    const Cell& c = archive.at(k);
    std::string last = c.trajectory.empty()
                           ? "<reset>"
                           : render(c.trajectory.back(), world.vocab, world.templates);
    out << std::hex << c.key << std::dec << "\t" << c.best_score << "\t" << c.trajectory.size()
        << "\t" << c.visits << "\t" << last << "\n";
  }
  return out.str();
}

}  // namespace grue
