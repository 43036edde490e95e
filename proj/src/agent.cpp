#include "grue/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grue/bytes.hpp"

namespace grue {

namespace {

constexpr std::uint8_t kParamsBlobVersion = 1;

struct Softmax {
  std::vector<double> probs;
  std::vector<double> logps;
  double entropy = 0.0;
};

Softmax softmax(const std::vector<double>& logits, const char* head) {
  for (double z : logits) {
    if (!std::isfinite(z))
      throw AgentFault(std::string("non-finite logit in ") + head + " head");
  }
  double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  Softmax s;
  s.probs.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    s.probs[i] = std::exp(logits[i] - m);
    sum += s.probs[i];
  }
  double lse = m + std::log(sum);
  s.logps.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    s.probs[i] /= sum;
    s.logps[i] = logits[i] - lse;
    if (s.probs[i] > 0.0) s.entropy -= s.probs[i] * s.logps[i];
  }
  return s;
}

int sample(const std::vector<double>& probs, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

double value_of(const PolicyParams& params, const std::vector<double>& features) {
  double v = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) v += params.w_value[i] * features[i];
  return v;
}

// Fill-head logits over the candidate set for blank k (0 or 1), conditioned
// on the chosen template via a one-hot block appended to the features.
std::vector<double> fill_logits(const PolicyParams& params, const std::vector<double>& features,
                                int chosen_template, int blank,
                                const std::vector<int>& candidates) {
  const std::vector<double>& w = blank == 0 ? params.w_object1 : params.w_object2;
  const int v = params.vocab_size;
  const std::size_t one_hot_row = features.size() + static_cast<std::size_t>(chosen_template);
  std::vector<double> logits(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const int word = candidates[c];
    double z = w[one_hot_row * static_cast<std::size_t>(v) + static_cast<std::size_t>(word)];
    for (std::size_t i = 0; i < features.size(); ++i)
      z += w[i * static_cast<std::size_t>(v) + static_cast<std::size_t>(word)] * features[i];
    logits[c] = z;
  }
  return logits;
}

std::vector<double> template_logits(const PolicyParams& params,
                                    const std::vector<double>& features) {
  std::vector<double> logits(static_cast<std::size_t>(params.num_templates), 0.0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double fi = features[i];
    if (fi == 0.0) continue;
    const std::size_t row = i * static_cast<std::size_t>(params.num_templates);
    for (int j = 0; j < params.num_templates; ++j)
      logits[static_cast<std::size_t>(j)] += params.w_template[row + static_cast<std::size_t>(j)] * fi;
  }
  return logits;
}

}  // namespace

AgentSpec AgentSpec::make(const WorldSpec& world, int bow_dim) {
  AgentSpec spec;
  spec.bow_dim = bow_dim;
  spec.noun_words = world.vocab.ids_with_tags(static_cast<unsigned>(Tag::kNoun) |
                                              static_cast<unsigned>(Tag::kProperNoun));
  spec.direction_words = world.vocab.ids_with_tags(static_cast<unsigned>(Tag::kDirection));
  spec.fallback_fills = spec.noun_words;
  for (int d : spec.direction_words) spec.fallback_fills.push_back(d);
  std::sort(spec.fallback_fills.begin(), spec.fallback_fills.end());
  spec.fallback_fills.erase(std::unique(spec.fallback_fills.begin(), spec.fallback_fills.end()),
                            spec.fallback_fills.end());
  spec.num_templates = static_cast<int>(world.templates.size());
  spec.vocab_size = world.vocab.size();
  return spec;
}

PolicyParams PolicyParams::zeros(const AgentSpec& spec) {
  PolicyParams p;
  p.feature_dim = spec.feature_dim();
  p.num_templates = spec.num_templates;
  p.vocab_size = spec.vocab_size;
  p.w_template.assign(static_cast<std::size_t>(p.feature_dim) * static_cast<std::size_t>(p.num_templates), 0.0);
  const std::size_t g = static_cast<std::size_t>(p.feature_dim + p.num_templates);
  p.w_object1.assign(g * static_cast<std::size_t>(p.vocab_size), 0.0);
  p.w_object2.assign(g * static_cast<std::size_t>(p.vocab_size), 0.0);
  p.w_value.assign(static_cast<std::size_t>(p.feature_dim), 0.0);
  return p;
}

std::vector<std::uint8_t> save_params(const PolicyParams& params) {
  ByteWriter w;
  w.u8(kParamsBlobVersion);
  w.u32(static_cast<std::uint32_t>(params.feature_dim));
  w.u32(static_cast<std::uint32_t>(params.num_templates));
  w.u32(static_cast<std::uint32_t>(params.vocab_size));
  for (const auto* block : {&params.w_template, &params.w_object1, &params.w_object2, &params.w_value}) {
    w.u64(block->size());
    for (double v : *block) w.f64(v);
  }
  return w.take();
}

PolicyParams load_params(const std::vector<std::uint8_t>& blob) {
  ByteReader r(blob);
  if (r.u8() != kParamsBlobVersion) throw DecodeError("unsupported params blob version");
  PolicyParams p;
  p.feature_dim = static_cast<int>(r.u32());
  p.num_templates = static_cast<int>(r.u32());
  p.vocab_size = static_cast<int>(r.u32());
  for (auto* block : {&p.w_template, &p.w_object1, &p.w_object2, &p.w_value}) {
    std::uint64_t n = r.u64();
    block->resize(n);
    for (std::uint64_t i = 0; i < n; ++i) (*block)[i] = r.f64();
  }
  r.expect_end();
  const std::size_t g = static_cast<std::size_t>(p.feature_dim + p.num_templates);
  if (p.w_template.size() != static_cast<std::size_t>(p.feature_dim) * static_cast<std::size_t>(p.num_templates) ||
      p.w_object1.size() != g * static_cast<std::size_t>(p.vocab_size) ||
      p.w_object2.size() != g * static_cast<std::size_t>(p.vocab_size) ||
      p.w_value.size() != static_cast<std::size_t>(p.feature_dim))
    throw DecodeError("params blob shape mismatch");
  return p;
}

void TrainingConfig::validate() const {
  if (!(discount > 0.0 && discount <= 1.0))
    throw std::invalid_argument("discount must be in (0, 1]");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
}

std::vector<double> encode_state(const WorldSpec& world, const AgentSpec& spec,
                                 const std::string& observation, const KnowledgeGraph& graph,
                                 const GameState& state, Variant variant) {
  std::vector<double> f(static_cast<std::size_t>(spec.feature_dim()), 0.0);
  for (const std::string& tok : tokenize(observation))
    f[fnv1a64(tok) % static_cast<std::uint64_t>(spec.bow_dim)] += 1.0;
  if (variant == Variant::kWithKg) {
    const GraphMask mask = kg::graph_mask(graph, world.vocab);
    for (std::size_t i = 0; i < spec.noun_words.size(); ++i)
      if (mask.count(spec.noun_words[i]))
        f[static_cast<std::size_t>(spec.bow_dim) + i] = 1.0;
  }
  f[f.size() - 2] = static_cast<double>(state.score) / 100.0;
  f[f.size() - 1] = static_cast<double>(state.steps) / static_cast<double>(std::max(1, world.max_steps));
  return f;
}

std::vector<int> fill_candidates(const AgentSpec& spec, const GraphMask& mask, Variant variant) {
  if (variant == Variant::kTextOnly || mask.empty()) return spec.fallback_fills;
  std::vector<int> out(mask.begin(), mask.end());
  for (int d : spec.direction_words) out.push_back(d);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> template_distribution(const PolicyParams& params,
                                          const std::vector<double>& features) {
  return softmax(template_logits(params, features), "template").probs;
}

std::vector<double> fill_distribution(const PolicyParams& params,
                                      const std::vector<double>& features, int template_id,
                                      int blank, const std::vector<int>& candidates) {
  return softmax(fill_logits(params, features, template_id, blank, candidates),
                 blank == 0 ? "object1" : "object2")
      .probs;
}

ActResult act(const PolicyParams& params, const std::vector<double>& features,
              const std::vector<int>& candidates, const std::vector<Template>& templates,
              Rng& rng) {
  ActResult r;
  Softmax tmpl = softmax(template_logits(params, features), "template");
  int chosen = sample(tmpl.probs, rng);
  r.action.template_id = chosen;
  r.template_logp = tmpl.logps[static_cast<std::size_t>(chosen)];
  r.value = value_of(params, features);
  const int arity = templates[static_cast<std::size_t>(chosen)].arity;
  for (int k = 0; k < arity; ++k) {
    if (candidates.empty()) throw AgentFault("empty fill candidate set");
    Softmax s = softmax(fill_logits(params, features, chosen, k, candidates),
                        k == 0 ? "object1" : "object2");
    int idx = sample(s.probs, rng);
    r.action.fills.push_back(candidates[static_cast<std::size_t>(idx)]);
    r.fill_logps.push_back(s.logps[static_cast<std::size_t>(idx)]);
  }
  return r;
}

// Gradients of the batch loss, flattened as [template | object1 | object2 |
// value]. The advantage uses the value estimates recorded at collection
// time (detached); only the value loss differentiates through w_value.
std::vector<double> a2c_gradients(const PolicyParams& params,
                                  const std::vector<TrajectoryStep>& batch,
                                  double bootstrap_value, const TrainingConfig& config,
                                  LossStats* stats) {
  if (batch.empty()) throw AgentFault("a2c update on empty batch");
  const int t_count = params.num_templates;
  const int v_count = params.vocab_size;
  const std::size_t n_tmpl = params.w_template.size();
  const std::size_t n_obj = params.w_object1.size();
  std::vector<double> grad(params.size(), 0.0);
  double* g_tmpl = grad.data();
  double* g_obj1 = g_tmpl + n_tmpl;
  double* g_obj2 = g_obj1 + n_obj;
  double* g_val = g_obj2 + n_obj;

  // Discounted returns, bootstrapped from the value after the last step
  // when the batch does not end an episode.
  std::vector<double> returns(batch.size());
  double running = batch.back().done ? 0.0 : bootstrap_value;
  for (std::size_t i = batch.size(); i-- > 0;) {
    if (batch[i].done) running = 0.0;
    running = batch[i].reward + config.discount * running;
    returns[i] = running;
  }

  LossStats ls;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TrajectoryStep& step = batch[i];
    const std::vector<double>& f = step.features;
    const double ret = returns[i];

    // Value head.
    const double v = value_of(params, f);
    const double verr = ret - v;
    ls.value_loss += verr * verr;
    const double dv = -2.0 * config.value_coef * verr;
    for (std::size_t j = 0; j < f.size(); ++j) g_val[j] += dv * f[j];

    if (step.off_policy) continue;

    const double advantage = ret - step.value;  // detached

    // Template head.
    Softmax tmpl = softmax(template_logits(params, f), "template");
    const int chosen = step.action.template_id;
    ls.policy_loss += -advantage * tmpl.logps[static_cast<std::size_t>(chosen)];
    ls.entropy += tmpl.entropy;
    for (int j = 0; j < t_count; ++j) {
      const double p = tmpl.probs[static_cast<std::size_t>(j)];
      const double indicator = j == chosen ? 1.0 : 0.0;
      const double dz = -advantage * (indicator - p) +
                        config.entropy_coef * p * (tmpl.logps[static_cast<std::size_t>(j)] + tmpl.entropy);
      if (dz == 0.0) continue;
      for (std::size_t fi = 0; fi < f.size(); ++fi)
        if (f[fi] != 0.0) g_tmpl[fi * static_cast<std::size_t>(t_count) + static_cast<std::size_t>(j)] += f[fi] * dz;
    }

    // Fill heads.
    for (std::size_t k = 0; k < step.action.fills.size(); ++k) {
      const std::vector<int>& cands = step.fill_candidates;
      Softmax s = softmax(fill_logits(params, f, chosen, static_cast<int>(k), cands),
                          k == 0 ? "object1" : "object2");
      auto it = std::find(cands.begin(), cands.end(), step.action.fills[k]);
      if (it == cands.end()) throw AgentFault("recorded fill missing from candidate set");
      const int chosen_idx = static_cast<int>(it - cands.begin());
      ls.policy_loss += -advantage * s.logps[static_cast<std::size_t>(chosen_idx)];
      ls.entropy += s.entropy;
      double* g_obj = k == 0 ? g_obj1 : g_obj2;
      const std::size_t one_hot_row = f.size() + static_cast<std::size_t>(chosen);
      for (std::size_t c = 0; c < cands.size(); ++c) {
        const double p = s.probs[c];
        const double indicator = static_cast<int>(c) == chosen_idx ? 1.0 : 0.0;
        const double dz =
            -advantage * (indicator - p) + config.entropy_coef * p * (s.logps[c] + s.entropy);
        if (dz == 0.0) continue;
        const std::size_t col = static_cast<std::size_t>(cands[c]);
        for (std::size_t fi = 0; fi < f.size(); ++fi)
          if (f[fi] != 0.0) g_obj[fi * static_cast<std::size_t>(v_count) + col] += f[fi] * dz;
        g_obj[one_hot_row * static_cast<std::size_t>(v_count) + col] += dz;
      }
    }
  }

  ls.total = ls.policy_loss + config.value_coef * ls.value_loss - config.entropy_coef * ls.entropy;
  if (stats) *stats = ls;
  return grad;
}

LossStats a2c_loss(const PolicyParams& params, const std::vector<TrajectoryStep>& batch,
                   double bootstrap_value, const TrainingConfig& config) {
  LossStats ls;
  a2c_gradients(params, batch, bootstrap_value, config, &ls);
  return ls;
}

LossStats a2c_update(PolicyParams& params, const std::vector<TrajectoryStep>& batch,
                     double bootstrap_value, const TrainingConfig& config) {
  LossStats ls;
  std::vector<double> grad = a2c_gradients(params, batch, bootstrap_value, config, &ls);
  if (!std::isfinite(ls.total)) throw AgentFault("non-finite loss; params unchanged");
  const double lr = config.learning_rate;
  std::size_t off = 0;
  for (auto* block : {&params.w_template, &params.w_object1, &params.w_object2, &params.w_value}) {
    for (std::size_t i = 0; i < block->size(); ++i) (*block)[i] -= lr * grad[off + i];
    off += block->size();
  }
  return ls;
}

EpisodeResult run_episode(const WorldSpec& world, const AgentSpec& spec,
                          const PolicyParams& params, Variant variant,
                          const TrainingConfig& config, const EpisodeOptions& options, Rng& rng) {
  EpisodeResult result;
  auto [state, obs] = engine::reset(world);
  KnowledgeGraph graph = kg::update_graph({}, obs.text, std::nullopt, world, state);

  if (options.prefix) {
    for (const TemplateAction& action : *options.prefix) {
      if (engine::is_done(world, state)) throw AgentFault("prefix replay hit a terminal state");
      auto [next, o] = engine::step(world, state, action);
      state = std::move(next);
      obs = std::move(o);
      graph = kg::update_graph(graph, obs.text, action, world, state);
      result.env_steps += 1;
      result.actions_from_reset.push_back(action);
      result.scores_after_action.push_back(state.score);
    }
    if (options.expected_blob && engine::snapshot(state) != *options.expected_blob)
      throw AgentFault("prefix replay diverged from recorded state");
  }

  const int cap = options.max_steps > 0
                      ? options.max_steps
                      : (config.max_episode_steps > 0 ? config.max_episode_steps
                                                      : std::numeric_limits<int>::max());
  int policy_steps = 0;
  while (!engine::is_done(world, state) && policy_steps < cap) {
    std::vector<double> features = encode_state(world, spec, obs.text, graph, state, variant);
    const GraphMask mask = kg::graph_mask(graph, world.vocab);
    std::vector<int> candidates = fill_candidates(spec, mask, variant);

    TrajectoryStep step;
    step.features = features;
    step.fill_candidates = candidates;
    if (policy_steps == 0 && options.forced_first) {
      step.action = *options.forced_first;
      step.off_policy = true;
      step.value = value_of(params, features);
    } else {
      ActResult r = act(params, features, candidates, world.templates, rng);
      step.action = r.action;
      step.template_logp = r.template_logp;
      step.fill_logps = r.fill_logps;
      step.value = r.value;
    }

    auto [next, o] = engine::step(world, state, step.action);
    step.reward = static_cast<double>(o.reward_delta);
    step.done = o.done;
    state = std::move(next);
    obs = std::move(o);
    graph = kg::update_graph(graph, obs.text, step.action, world, state);
    result.env_steps += 1;
    result.actions_from_reset.push_back(step.action);
    result.scores_after_action.push_back(state.score);
    result.steps.push_back(std::move(step));
    policy_steps += 1;
  }

  result.final_score = state.score;
  result.done = engine::is_done(world, state);
  result.final_state = std::move(state);
  result.final_kg = std::move(graph);
  result.final_observation = obs.text;
  return result;
}

}  // namespace grue
