#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "grue/agent.hpp"

namespace grue {

struct ArchiveFault : std::runtime_error {
  explicit ArchiveFault(const std::string& what) : std::runtime_error(what) {}
};

// Cell identity: with-kg combines the canonical KG hash with the game state
// hash (order-sensitive); text-only digests the last observation text.
std::uint64_t cell_key(const KnowledgeGraph& graph, const GameState& state,
                       const std::string& observation, Variant variant);

struct Cell {
  std::uint64_t key = 0;
  std::int64_t best_score = 0;
  std::vector<TemplateAction> trajectory;  // actions from reset
  std::uint64_t visits = 0;
  std::int64_t discovery_step = 0;  // env-step counter at first insertion

  // In-memory restoration fast path: the snapshot, graph and observation
  // the key was computed from. Not checkpointed; expansion falls back to
  // trajectory replay (with verification) when absent.
  bool has_cache = false;
  std::vector<std::uint8_t> cached_blob;
  KnowledgeGraph cached_graph;
  std::string cached_observation;
};

// Promising-state archive. Insertion order is kept so selection is
// deterministic for a given seed.
class Archive {
 public:
  bool contains(std::uint64_t key) const { return cells_.count(key) != 0; }
  const Cell& at(std::uint64_t key) const { return cells_.at(key); }
  Cell& at(std::uint64_t key) { return cells_.at(key); }
  std::size_t size() const { return order_.size(); }
  const std::vector<std::uint64_t>& keys() const { return order_; }

  // True when the key was new. An existing cell is updated only on a higher
  // score, or an equal score with a shorter trajectory. The cache
  // arguments, when given, describe the state the key was computed from.
  bool insert_or_update(std::uint64_t key, std::int64_t score,
                        const std::vector<TemplateAction>& trajectory,
                        std::int64_t discovery_step, const GameState* state = nullptr,
                        const KnowledgeGraph* graph = nullptr,
                        const std::string* observation = nullptr);

  std::int64_t global_best = 0;
  std::uint64_t expansions = 0;

 private:
  std::unordered_map<std::uint64_t, Cell> cells_;
  std::vector<std::uint64_t> order_;
};

// Weighted sample: p(cell) proportional to (score - min_score + 1).
const Cell& select_cell(const Archive& archive, Rng& rng);

struct GoExploreConfig {
  TrainingConfig train;  // one update per rollout: batch_size is 1 rollout
  int cell_step_size = 30;
  std::int64_t step_budget = 50000;
};

struct ExpandStats {
  int new_cells = 0;
  int updated_cells = 0;
  std::int64_t rollout_final_score = 0;
  int env_steps = 0;  // replay + rollout
};

// Restores the cell by replaying its trajectory from reset (rebuilding the
// knowledge graph alongside), verifies key and score, rolls the policy out
// for cell_step_size steps inserting/updating cells after each, then
// applies one a2c update on the rollout. Throws ArchiveFault on replay
// divergence, leaving the archive unchanged.
ExpandStats expand_cell(Archive& archive, std::uint64_t key, PolicyParams& params,
                        const WorldSpec& world, const AgentSpec& spec, Variant variant,
                        const GoExploreConfig& config, Rng& rng,
                        std::int64_t env_step_base = 0);

struct ExpansionRecord {
  int expansion = 0;
  std::int64_t env_steps = 0;  // cumulative
  std::int64_t best_score = 0;
  std::int64_t rollout_score = 0;
  std::uint64_t cells = 0;
  int new_cells = 0;
};

struct GoExploreResult {
  std::vector<ExpansionRecord> log;
  Archive archive;
  PolicyParams params;
  std::string termination;  // budget | max_score
  std::int64_t total_env_steps = 0;
};

GoExploreResult train_goexplore(const WorldSpec& world, const AgentSpec& spec,
                                const GoExploreConfig& config, Variant variant,
                                std::uint64_t seed);

// Versioned binary archive checkpoint.
std::vector<std::uint8_t> save_archive(const Archive& archive, Variant variant);
std::pair<Archive, Variant> load_archive(const std::vector<std::uint8_t>& blob);

// Human-readable table, sorted by descending score then key.
std::string inspect_archive(const Archive& archive, const WorldSpec& world);

}  // namespace grue
