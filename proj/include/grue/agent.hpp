#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grue/kg.hpp"
#include "grue/rng.hpp"

namespace grue {

struct AgentFault : std::runtime_error {
  explicit AgentFault(const std::string& what) : std::runtime_error(what) {}
};

// with-kg agents see the knowledge graph (KG feature block + mask-constrained
// fills); text-only agents see the observation text alone.
enum class Variant : std::uint8_t { kWithKg, kTextOnly };

// Fixed dimensions and word groups derived from a world. Shared by both
// variants so the two differ only in the KG block and fill constraints.
struct AgentSpec {
  int bow_dim = 256;
  std::vector<int> noun_words;      // noun/proper-noun tagged ids, ascending
  std::vector<int> direction_words; // direction tagged ids, ascending
  std::vector<int> fallback_fills;  // noun_words + direction_words, sorted
  int num_templates = 0;
  int vocab_size = 0;

  int feature_dim() const { return bow_dim + static_cast<int>(noun_words.size()) + 2; }
  static AgentSpec make(const WorldSpec& world, int bow_dim = 256);
};

// Linear heads: template selection, two fill heads conditioned on the
// chosen template, and a value estimate.
struct PolicyParams {
  int feature_dim = 0;
  int num_templates = 0;
  int vocab_size = 0;
  std::vector<double> w_template;  // [feature_dim x num_templates]
  std::vector<double> w_object1;   // [(feature_dim+num_templates) x vocab_size]
  std::vector<double> w_object2;   // [(feature_dim+num_templates) x vocab_size]
  std::vector<double> w_value;     // [feature_dim]

  static PolicyParams zeros(const AgentSpec& spec);
  std::size_t size() const {
    return w_template.size() + w_object1.size() + w_object2.size() + w_value.size();
  }
  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

std::vector<std::uint8_t> save_params(const PolicyParams& params);
PolicyParams load_params(const std::vector<std::uint8_t>& blob);

struct TrainingConfig {
  double learning_rate = 3e-3;
  double discount = 0.9;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int batch_size = 32;
  int max_episode_steps = 0;  // 0 -> world max_steps

  void validate() const;
};

struct TrajectoryStep {
  std::vector<double> features;
  TemplateAction action;
  std::vector<int> fill_candidates;  // candidate word ids at decision time
  double template_logp = 0.0;
  std::vector<double> fill_logps;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
  bool off_policy = false;  // forced exploration step: no policy/entropy loss
};

struct LossStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double total = 0.0;
};

// Hashed bag-of-words of the observation, KG entity indicators (zeroed for
// text-only), score/100 and normalized step count.
std::vector<double> encode_state(const WorldSpec& world, const AgentSpec& spec,
                                 const std::string& observation, const KnowledgeGraph& graph,
                                 const GameState& state, Variant variant);

// Candidate word ids for template blanks. With-kg: mask entities plus
// direction words (navigation must stay reachable before any movement has
// been recorded); empty mask falls back to all noun+direction words.
// Text-only: always the fallback set.
std::vector<int> fill_candidates(const AgentSpec& spec, const GraphMask& mask, Variant variant);

struct ActResult {
  TemplateAction action;
  double template_logp = 0.0;
  std::vector<double> fill_logps;
  double value = 0.0;
};

// Samples a template from the template head and each blank from the
// mask-constrained fill head. Throws AgentFault on non-finite logits.
ActResult act(const PolicyParams& params, const std::vector<double>& features,
              const std::vector<int>& candidates, const std::vector<Template>& templates,
              Rng& rng);

// The exact distributions act() samples from.
std::vector<double> template_distribution(const PolicyParams& params,
                                          const std::vector<double>& features);
std::vector<double> fill_distribution(const PolicyParams& params,
                                      const std::vector<double>& features, int template_id,
                                      int blank, const std::vector<int>& candidates);

// Loss of one batch under `params` (no mutation). Exposed so gradients can
// be checked against finite differences of this exact function.
LossStats a2c_loss(const PolicyParams& params, const std::vector<TrajectoryStep>& batch,
                   double bootstrap_value, const TrainingConfig& config);

// One analytic gradient-descent step on the batch. Throws AgentFault on a
// non-finite loss, leaving params unchanged.
LossStats a2c_update(PolicyParams& params, const std::vector<TrajectoryStep>& batch,
                     double bootstrap_value, const TrainingConfig& config);

// Same analytic gradients a2c_update applies, flattened in parameter order
// (template, object1, object2, value). Test hook for the FD oracle.
std::vector<double> a2c_gradients(const PolicyParams& params,
                                  const std::vector<TrajectoryStep>& batch,
                                  double bootstrap_value, const TrainingConfig& config,
                                  LossStats* stats = nullptr);

struct EpisodeOptions {
  const std::vector<TemplateAction>* prefix = nullptr;    // replayed from reset
  const std::vector<std::uint8_t>* expected_blob = nullptr;  // post-prefix cross-check
  std::optional<TemplateAction> forced_first;             // overrides the first policy action
  int max_steps = 0;  // cap on policy steps this episode; 0 -> until done
};

struct EpisodeResult {
  std::vector<TrajectoryStep> steps;  // policy-driven steps (post-prefix)
  std::int64_t final_score = 0;
  bool done = false;
  int env_steps = 0;  // total engine steps incl. prefix replay
  std::vector<TemplateAction> actions_from_reset;
  std::vector<std::int64_t> scores_after_action;  // absolute, one per action
  GameState final_state;
  KnowledgeGraph final_kg;
  std::string final_observation;
};

EpisodeResult run_episode(const WorldSpec& world, const AgentSpec& spec,
                          const PolicyParams& params, Variant variant,
                          const TrainingConfig& config, const EpisodeOptions& options, Rng& rng);

}  // namespace grue
