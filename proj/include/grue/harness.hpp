#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grue/cells.hpp"
#include "grue/chain.hpp"

namespace grue {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class AgentKind : std::uint8_t {
  kA2c,
  kKgA2c,
  kA2cChained,
  kKgA2cChained,
  kA2cExplore,
  kKgA2cExplore,
};

const char* agent_name(AgentKind kind);
AgentKind agent_from_name(const std::string& name);
Variant agent_variant(AgentKind kind);

// Resolved experiment description: one agent, one world, many seeds.
struct ExperimentConfig {
  std::string world_path;
  std::string world_text;  // loaded world document
  AgentKind agent = AgentKind::kKgA2cChained;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::int64_t step_budget = 50000;

  int patience = 35;
  int buffer_capacity = 40;
  int batch_size_chained = 32;
  int batch_size_explore = 1;
  int cell_step_size = 30;
  double forced_explore_prob = 0.3;

  double learning_rate = 3e-3;
  double discount = 0.9;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int bow_dim = 256;
  int max_episode_steps = 0;  // 0 -> world max_steps

  // Reporting threshold: a seed passes the bottleneck when its max score
  // exceeds this value.
  std::int64_t bottleneck_score = 0;

  void validate() const;
  std::uint64_t digest() const;
  TrainingConfig training(bool chained) const;
};

// Parses a JSON config document; `agent` and `seeds` may be overridden later.
ExperimentConfig load_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

struct RunRecord {
  std::uint64_t config_digest = 0;
  AgentKind agent = AgentKind::kA2c;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> series;  // per-episode (or per-expansion best) scores
  std::int64_t max_score = 0;
  double asymptotic_score = 0.0;  // mean of the final 10% of the series
  std::string terminal_event;     // budget | exhausted | max_score
  std::int64_t total_env_steps = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> log_lines;  // JSONL records
  PolicyParams final_params;
};

double asymptotic_score(const std::vector<std::int64_t>& series);

// Plain (non-exploring) A2C baseline: continuous episodes with batched
// updates across episode boundaries.
struct PlainRunResult {
  std::vector<EpisodeRecord> log;
  PolicyParams params;
  std::int64_t best_score = 0;
  std::string termination;
  std::int64_t total_env_steps = 0;
};

PlainRunResult train_plain(const WorldSpec& world, const AgentSpec& spec,
                           const TrainingConfig& config, Variant variant, std::uint64_t seed,
                           std::int64_t step_budget, const PolicyParams* initial = nullptr);

// One record per seed; seeds run as independent parallel jobs.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config);
RunRecord run_seed(const ExperimentConfig& config, const WorldSpec& world, std::uint64_t seed);

// Ablation table: agent, mean asymptotic reward, std, bottleneck pass rate.
std::string report_table(const std::vector<RunRecord>& records, std::int64_t bottleneck_score);
// Per-run learning curve.
std::string curve_csv(const RunRecord& record);

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

// WorldSpec invariants plus brute-force reachability of every reward.
ValidationReport validate_world(const std::string& world_text, int max_states = 20000);

}  // namespace grue
