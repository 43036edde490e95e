#include "grue/chain.hpp"

#include <algorithm>

#include "grue/admissible.hpp"

namespace grue {

std::vector<TemplateAction> PolicyChain::full_prefix() const {
  std::vector<TemplateAction> out;
  for (const ChainSegment& s : segments) out.insert(out.end(), s.prefix.begin(), s.prefix.end());
  return out;
}

int best_anchor_length(const std::vector<std::int64_t>& scores_after_action) {
  std::int64_t max_score = 0;
  int anchor_len = 0;
  for (std::size_t i = 0; i < scores_after_action.size(); ++i) {
    if (scores_after_action[i] > max_score) {
      max_score = scores_after_action[i];
      anchor_len = static_cast<int>(i) + 1;
    }
  }
  return anchor_len;
}

std::vector<BufferEntry> backtrack_states(const WorldSpec& world,
                                          const std::vector<TemplateAction>& best_actions,
                                          int anchor_len, int capacity) {
  std::vector<BufferEntry> out;
  const int lo = std::max(anchor_len - capacity, 0);
  for (int j = lo; j < anchor_len; ++j) {
    auto [state, obs] = engine::reset(world);
    (void)obs;
    for (int i = 0; i < j; ++i) {
      auto [next, o] = engine::step(world, state, best_actions[static_cast<std::size_t>(i)]);
      (void)o;
      state = std::move(next);
    }
    BufferEntry e;
    e.state_blob = engine::snapshot(state);
    e.admissible = admissible_actions(world, state);
    e.score = state.score;
    e.step_index = j;
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

struct Trainer {
  const WorldSpec& world;
  const AgentSpec& spec;
  const ChainConfig& config;
  Variant variant;
  Rng rng;

  PolicyChain chain;
  BottleneckDetector detector;
  BacktrackBuffer buffer;
  bool frozen_at_current_best = false;
  int backtrack_depth = 0;

  // Best trajectory from reset: actions and the absolute score after each.
  std::vector<TemplateAction> best_actions;
  std::vector<std::int64_t> best_scores;

  std::vector<TemplateAction> anchor_prefix;  // cached full prefix
  std::vector<std::uint8_t> anchor_blob;
  std::vector<TemplateAction> anchor_admissible;

  std::int64_t env_steps = 0;
  ChainRunResult result;

  Trainer(const WorldSpec& w, const AgentSpec& s, const ChainConfig& c, Variant v,
          std::uint64_t seed)
      : world(w), spec(s), config(c), variant(v), rng(seed),
        detector(c.patience), buffer(c.buffer_capacity) {
    chain.active = PolicyParams::zeros(s);
  }

  // Replays the first `count` best actions; returns the resulting state.
  GameState replay_best(int count) const {
    auto [state, obs] = engine::reset(world);
    (void)obs;
    for (int i = 0; i < count; ++i) {
      auto [next, o] = engine::step(world, state, best_actions[static_cast<std::size_t>(i)]);
      (void)o;
      state = std::move(next);
    }
    return state;
  }

  void set_anchor(int anchor_len, std::int64_t anchor_score) {
    anchor_prefix.assign(best_actions.begin(), best_actions.begin() + anchor_len);
    GameState anchor_state = replay_best(anchor_len);
    if (anchor_state.score != anchor_score)
      throw AgentFault("anchor replay does not reproduce the recorded score");
    anchor_blob = engine::snapshot(anchor_state);
    anchor_admissible = admissible_actions(world, anchor_state);
  }

  void freeze() {
    if (best_actions.empty()) throw AgentFault("freeze without a recorded best trajectory");
    const int anchor_len = best_anchor_length(best_scores);
    const std::int64_t max_score = anchor_len == 0 ? 0 : best_scores[static_cast<std::size_t>(anchor_len) - 1];
    int prev_total = static_cast<int>(chain.full_prefix().size());
    ChainSegment seg;
    seg.frozen = chain.active;
    seg.prefix.assign(best_actions.begin() + prev_total, best_actions.begin() + anchor_len);
    seg.anchor_score = max_score;
    chain.segments.push_back(std::move(seg));
    chain.active = PolicyParams::zeros(spec);

    buffer.clear();
    for (BufferEntry& e : backtrack_states(world, best_actions, anchor_len, buffer.capacity()))
      buffer.push_newest(std::move(e));

    set_anchor(anchor_len, max_score);
    detector.reset_counter();
    frozen_at_current_best = true;
    backtrack_depth = 0;
  }

  // Moves the anchor one buffered state earlier; false when exhausted.
  bool backtrack() {
    std::optional<BufferEntry> entry = buffer.pop_newest();
    if (!entry) return false;
    const int j = entry->step_index;
    // Trim trailing segments the new anchor no longer reaches.
    while (!chain.segments.empty()) {
      int start = static_cast<int>(chain.full_prefix().size()) -
                  static_cast<int>(chain.segments.back().prefix.size());
      if (j >= start) {
        chain.segments.back().prefix.assign(best_actions.begin() + start,
                                            best_actions.begin() + j);
        chain.segments.back().anchor_score = entry->score;
        break;
      }
      chain.segments.pop_back();
    }
    if (chain.segments.empty()) {
      ChainSegment seg;
      seg.frozen = chain.active;
      seg.prefix.assign(best_actions.begin(), best_actions.begin() + j);
      seg.anchor_score = entry->score;
      chain.segments.push_back(std::move(seg));
    }
    chain.active = PolicyParams::zeros(spec);
    anchor_prefix.assign(best_actions.begin(), best_actions.begin() + j);
    anchor_blob = entry->state_blob;
    anchor_admissible = entry->admissible;
    detector.reset_counter();
    backtrack_depth += 1;
    return true;
  }

  void train_on(const std::vector<TrajectoryStep>& steps) {
    const int bs = config.train.batch_size;
    for (std::size_t start = 0; start < steps.size(); start += static_cast<std::size_t>(bs)) {
      std::size_t end = std::min(steps.size(), start + static_cast<std::size_t>(bs));
      std::vector<TrajectoryStep> batch(steps.begin() + static_cast<std::ptrdiff_t>(start),
                                        steps.begin() + static_cast<std::ptrdiff_t>(end));
      double bootstrap = 0.0;
      if (!batch.back().done && end < steps.size()) bootstrap = steps[end].value;
      a2c_update(chain.active, batch, bootstrap, config.train);
    }
  }

  void run() {
    config.train.validate();
    const std::int64_t top = world.max_score();
    int episode = 0;
    while (env_steps < config.step_budget) {
      episode += 1;
      EpisodeOptions options;
      if (!anchor_prefix.empty() || !chain.segments.empty()) {
        options.prefix = &anchor_prefix;
        options.expected_blob = anchor_blob.empty() ? nullptr : &anchor_blob;
      }
      if (!anchor_admissible.empty() && rng.uniform() < config.forced_explore_prob) {
        options.forced_first =
            anchor_admissible[static_cast<std::size_t>(rng.uniform_int(
                static_cast<int>(anchor_admissible.size())))];
      }
      EpisodeResult ep = run_episode(world, spec, chain.active, variant, config.train, options, rng);
      env_steps += ep.env_steps;
      if (!anchor_prefix.empty() &&
          ep.scores_after_action[anchor_prefix.size() - 1] != chain.anchor_score())
        throw AgentFault("anchor prefix replay diverged from anchor score");
      train_on(ep.steps);

      BottleneckDetector::Signal sig = detector.observe(ep.final_score);
      EpisodeRecord rec;
      rec.episode = episode;
      rec.steps = static_cast<int>(ep.steps.size());
      rec.score = ep.final_score;
      rec.segment = static_cast<int>(chain.segments.size());
      rec.backtrack_depth = backtrack_depth;
      rec.event = "continue";

      if (sig.new_best) {
        best_actions = ep.actions_from_reset;
        best_scores = ep.scores_after_action;
        frozen_at_current_best = false;
        rec.event = "improve";
      }
      if (detector.best_score() >= top && top > 0) {
        rec.event = "terminate";
        result.termination = "max_score";
        result.log.push_back(rec);
        break;
      }
      if (sig.bottleneck) {
        if (!frozen_at_current_best) {
          freeze();
          rec.event = "freeze";
          rec.segment = static_cast<int>(chain.segments.size());
        } else if (backtrack()) {
          rec.event = "backtrack";
          rec.backtrack_depth = backtrack_depth;
        } else {
          rec.event = "terminate";
          result.termination = "exhausted";
          result.log.push_back(rec);
          break;
        }
      }
      result.log.push_back(rec);
    }
    if (result.termination.empty()) result.termination = "budget";
    result.best_score = detector.has_best() ? detector.best_score() : 0;
    result.best_actions = best_actions;
    result.chain = std::move(chain);
    result.total_env_steps = env_steps;
  }
};

}  // namespace

ChainRunResult train_chained(const WorldSpec& world, const AgentSpec& spec,
                             const ChainConfig& config, Variant variant, std::uint64_t seed) {
  Trainer trainer(world, spec, config, variant, splitmix64(seed ^ 0xc4a1ce5u));
  trainer.run();
  return std::move(trainer.result);
}

}  // namespace grue
