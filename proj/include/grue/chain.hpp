#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "grue/agent.hpp"

namespace grue {

// Episode-level bottleneck detection: the first episode primes the best
// score without counting as an improvement; only strict improvements reset
// the non-improvement counter.
class BottleneckDetector {
 public:
  struct Signal {
    bool new_best = false;
    bool bottleneck = false;
  };

  explicit BottleneckDetector(int patience) : patience_(patience) {}

  Signal observe(std::int64_t score) {
    Signal s;
    if (!has_best_) {
      has_best_ = true;
      best_ = score;
      since_ = 1;
      s.new_best = true;
    } else if (score > best_) {
      best_ = score;
      since_ = 0;
      s.new_best = true;
    } else {
      ++since_;
    }
    s.bottleneck = since_ >= patience_;
    return s;
  }

  // Opens a fresh patience window (after a freeze or backtrack); the best
  // score is global and survives.
  void reset_counter() { since_ = 0; }

  bool has_best() const { return has_best_; }
  std::int64_t best_score() const { return best_; }
  int episodes_since_improvement() const { return since_; }
  int patience() const { return patience_; }

 private:
  int patience_;
  bool has_best_ = false;
  std::int64_t best_ = 0;
  int since_ = 0;
};

// One recorded state along the best trajectory: enough to re-anchor
// training there and to seed exploration with its admissible actions.
struct BufferEntry {
  std::vector<std::uint8_t> state_blob;
  std::vector<TemplateAction> admissible;
  std::int64_t score = 0;
  int step_index = 0;  // actions from reset to reach this state
};

// The last n states before the current anchor, oldest to newest; backtrack
// consumes newest first.
class BacktrackBuffer {
 public:
  explicit BacktrackBuffer(int capacity) : capacity_(capacity) {}

  void clear() { entries_.clear(); }
  void push_newest(BufferEntry e) {
    entries_.push_back(std::move(e));
    while (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
  }
  std::optional<BufferEntry> pop_newest() {
    if (entries_.empty()) return std::nullopt;
    BufferEntry e = std::move(entries_.back());
    entries_.pop_back();
    return e;
  }
  int size() const { return static_cast<int>(entries_.size()); }
  int capacity() const { return capacity_; }

 private:
  int capacity_;
  std::deque<BufferEntry> entries_;
};

// A frozen policy and the slice of the best trajectory it contributes to
// the replayed anchor prefix.
struct ChainSegment {
  PolicyParams frozen;
  std::vector<TemplateAction> prefix;  // incremental actions
  std::int64_t anchor_score = 0;       // absolute score after replay up to here
};

struct PolicyChain {
  std::vector<ChainSegment> segments;
  PolicyParams active;

  std::vector<TemplateAction> full_prefix() const;
  std::int64_t anchor_score() const {
    return segments.empty() ? 0 : segments.back().anchor_score;
  }
};

// Earliest prefix length reaching the trajectory's maximum score; 0 when no
// action improved on the reset score.
int best_anchor_length(const std::vector<std::int64_t>& scores_after_action);

// Buffer contents for an anchor at `anchor_len`: the up-to-`capacity`
// states strictly before the anchor along the best trajectory, oldest to
// newest.
std::vector<BufferEntry> backtrack_states(const WorldSpec& world,
                                          const std::vector<TemplateAction>& best_actions,
                                          int anchor_len, int capacity);

struct ChainConfig {
  TrainingConfig train;            // batch_size defaults to 32 for chained agents
  int patience = 35;
  int buffer_capacity = 40;
  double forced_explore_prob = 0.3;  // first action drawn from the anchor's admissible set
  std::int64_t step_budget = 50000;
};

struct EpisodeRecord {
  int episode = 0;
  int steps = 0;
  std::int64_t score = 0;
  int segment = 0;
  int backtrack_depth = 0;
  std::string event;  // improve | freeze | backtrack | terminate | continue
};

struct ChainRunResult {
  std::vector<EpisodeRecord> log;
  PolicyChain chain;
  std::int64_t best_score = 0;
  std::vector<TemplateAction> best_actions;
  std::string termination;  // budget | exhausted | max_score
  std::int64_t total_env_steps = 0;
};

ChainRunResult train_chained(const WorldSpec& world, const AgentSpec& spec,
                             const ChainConfig& config, Variant variant, std::uint64_t seed);

}  // namespace grue
