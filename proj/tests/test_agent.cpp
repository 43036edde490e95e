#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "grue/agent.hpp"
#include "grue/bytes.hpp"
#include "test_util.hpp"

using namespace grue;
using testutil::minigrue;
using testutil::play;

namespace {

double& param_at(PolicyParams& p, std::size_t idx) {
  if (idx < p.w_template.size()) return p.w_template[idx];
  idx -= p.w_template.size();
  if (idx < p.w_object1.size()) return p.w_object1[idx];
  idx -= p.w_object1.size();
  if (idx < p.w_object2.size()) return p.w_object2[idx];
  idx -= p.w_object2.size();
  return p.w_value[idx];
}

PolicyParams random_params(int feature_dim, int num_templates, int vocab_size, Rng& rng) {
  PolicyParams p;
  p.feature_dim = feature_dim;
  p.num_templates = num_templates;
  p.vocab_size = vocab_size;
  p.w_template.resize(static_cast<std::size_t>(feature_dim) * static_cast<std::size_t>(num_templates));
  const std::size_t g = static_cast<std::size_t>(feature_dim + num_templates);
  p.w_object1.resize(g * static_cast<std::size_t>(vocab_size));
  p.w_object2.resize(g * static_cast<std::size_t>(vocab_size));
  p.w_value.resize(static_cast<std::size_t>(feature_dim));
  for (std::size_t i = 0; i < p.size(); ++i) param_at(p, i) = rng.uniform() - 0.5;
  return p;
}

std::vector<TrajectoryStep> random_batch(int steps, int feature_dim, int num_templates,
                                         int vocab_size, Rng& rng) {
  std::vector<TrajectoryStep> batch;
  for (int i = 0; i < steps; ++i) {
    TrajectoryStep s;
    s.features.resize(static_cast<std::size_t>(feature_dim));
    for (double& f : s.features) f = rng.uniform() < 0.3 ? 0.0 : 2.0 * rng.uniform() - 1.0;
    int n_cands = 3 + rng.uniform_int(std::max(1, vocab_size - 3));
    std::set<int> cand_set;
    while (static_cast<int>(cand_set.size()) < n_cands) cand_set.insert(rng.uniform_int(vocab_size));
    s.fill_candidates.assign(cand_set.begin(), cand_set.end());
    s.action.template_id = rng.uniform_int(num_templates);
    int arity = rng.uniform_int(3);
    for (int k = 0; k < arity; ++k)
      s.action.fills.push_back(
          s.fill_candidates[static_cast<std::size_t>(rng.uniform_int(n_cands))]);
    s.value = 2.0 * rng.uniform() - 1.0;
    s.reward = 2.0 * rng.uniform() - 1.0;
    s.done = i + 1 == steps ? rng.uniform() < 0.5 : rng.uniform() < 0.1;
    s.off_policy = rng.uniform() < 0.15;
    batch.push_back(std::move(s));
  }
  return batch;
}

}  // namespace

TEST_CASE("state encoding is deterministic and variants differ only in the KG block") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w, 64);
  auto p = play(w, {"open mailbox", "go north"});
  auto f1 = encode_state(w, spec, p.obs.text, p.graph, p.state, Variant::kWithKg);
  auto f2 = encode_state(w, spec, p.obs.text, p.graph, p.state, Variant::kWithKg);
  CHECK(f1 == f2);
  CHECK(static_cast<int>(f1.size()) == spec.feature_dim());

  auto text_only = encode_state(w, spec, p.obs.text, p.graph, p.state, Variant::kTextOnly);
  const std::size_t kg_lo = static_cast<std::size_t>(spec.bow_dim);
  const std::size_t kg_hi = kg_lo + spec.noun_words.size();
  for (std::size_t i = 0; i < f1.size(); ++i) {
    if (i >= kg_lo && i < kg_hi) {
      CHECK(text_only[i] == 0.0);
    } else {
      CHECK(f1[i] == text_only[i]);
    }
  }

  // The KG block is an indicator of the mask.
  auto walk = play(w, testutil::minigrue_walkthrough());
  auto fw = encode_state(w, spec, walk.obs.text, walk.graph, walk.state, Variant::kWithKg);
  double ones = 0;
  for (std::size_t i = kg_lo; i < kg_hi; ++i) ones += fw[i];
  CHECK(ones == doctest::Approx(7.0));  // golden walkthrough mask size
}

TEST_CASE("fill candidate sets per variant and mask") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w);
  CHECK(fill_candidates(spec, {}, Variant::kWithKg) == spec.fallback_fills);
  CHECK(fill_candidates(spec, {}, Variant::kTextOnly) == spec.fallback_fills);

  GraphMask mask = {w.vocab.id_of("lamp")};
  CHECK(fill_candidates(spec, mask, Variant::kTextOnly) == spec.fallback_fills);
  std::vector<int> with_kg = fill_candidates(spec, mask, Variant::kWithKg);
  std::vector<int> expected = spec.direction_words;
  expected.push_back(w.vocab.id_of("lamp"));
  std::sort(expected.begin(), expected.end());
  CHECK(with_kg == expected);
}

TEST_CASE("act with a single-entity mask always fills that entity") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w, 32);
  Rng rng(3);
  PolicyParams params = random_params(spec.feature_dim(), spec.num_templates, spec.vocab_size, rng);
  std::vector<double> features(static_cast<std::size_t>(spec.feature_dim()), 0.25);
  std::vector<int> only = {w.vocab.id_of("lamp")};
  for (int i = 0; i < 50; ++i) {
    ActResult r = act(params, features, only, w.templates, rng);
    for (int fill : r.action.fills) CHECK(fill == w.vocab.id_of("lamp"));
  }
}

TEST_CASE("zero parameters sample templates uniformly (chi-square)") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w, 32);
  PolicyParams params = PolicyParams::zeros(spec);
  std::vector<double> features(static_cast<std::size_t>(spec.feature_dim()), 0.5);
  std::vector<int> cands = spec.fallback_fills;
  Rng rng(11);
  const int n = 10000;
  std::vector<int> counts(w.templates.size(), 0);
  for (int i = 0; i < n; ++i)
    counts[static_cast<std::size_t>(act(params, features, cands, w.templates, rng).action.template_id)]++;
  double expected = static_cast<double>(n) / static_cast<double>(w.templates.size());
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // dof = 13; the 0.001 critical value is 34.5.
  CHECK(chi2 < 34.5);
}

TEST_CASE("sampled fills never leave the candidate set over 1e5 trials") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w, 32);
  Rng rng(5);
  PolicyParams params = random_params(spec.feature_dim(), spec.num_templates, spec.vocab_size, rng);
  std::vector<double> features(static_cast<std::size_t>(spec.feature_dim()), 0.1);
  std::vector<int> cands = {w.vocab.id_of("mailbox"), w.vocab.id_of("egg"), w.vocab.id_of("north")};
  std::sort(cands.begin(), cands.end());
  const int treasure = w.vocab.id_of("treasure");
  long long fills_seen = 0;
  for (int i = 0; i < 100000; ++i) {
    ActResult r = act(params, features, cands, w.templates, rng);
    for (int fill : r.action.fills) {
      ++fills_seen;
      bool in_set = std::find(cands.begin(), cands.end(), fill) != cands.end();
      if (!in_set || fill == treasure) {
        CHECK(in_set);
        CHECK(fill != treasure);
      }
    }
  }
  CHECK(fills_seen > 10000);
}

TEST_CASE("policy distributions are normalized after masking") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w, 32);
  Rng rng(17);
  PolicyParams params = random_params(spec.feature_dim(), spec.num_templates, spec.vocab_size, rng);
  std::vector<double> features(static_cast<std::size_t>(spec.feature_dim()));
  for (double& f : features) f = rng.uniform();
  std::vector<int> cands = {1, 4, 7, 9};
  double sum = 0.0;
  for (double p : template_distribution(params, features)) sum += p;
  CHECK(std::abs(sum - 1.0) < 1e-9);
  for (int blank = 0; blank < 2; ++blank) {
    double fsum = 0.0;
    for (double p : fill_distribution(params, features, 2, blank, cands)) fsum += p;
    CHECK(std::abs(fsum - 1.0) < 1e-9);
  }
}

TEST_CASE("non-finite logits fault instead of sampling") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w, 32);
  PolicyParams params = PolicyParams::zeros(spec);
  params.w_template[0] = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> features(static_cast<std::size_t>(spec.feature_dim()), 1.0);
  Rng rng(1);
  CHECK_THROWS_AS(act(params, features, spec.fallback_fills, w.templates, rng), AgentFault);
}

TEST_CASE("zero batch analytics: no loss, uniform entropy") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w, 32);
  PolicyParams params = PolicyParams::zeros(spec);
  TrainingConfig cfg;
  std::vector<TrajectoryStep> batch;
  for (int i = 0; i < 6; ++i) {
    TrajectoryStep s;
    s.features.assign(static_cast<std::size_t>(spec.feature_dim()), 0.5);
    s.action = {0, {}};  // arity-0 template
    s.fill_candidates = spec.fallback_fills;
    s.value = 0.0;
    s.reward = 0.0;
    s.done = i == 5;
    batch.push_back(std::move(s));
  }
  LossStats ls = a2c_loss(params, batch, 0.0, cfg);
  CHECK(ls.value_loss == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ls.policy_loss == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ls.entropy == doctest::Approx(6.0 * std::log(static_cast<double>(w.templates.size()))));
}

TEST_CASE("analytic gradients match central finite differences") {
  // Small dimensions so every coordinate is checked on every batch.
  const int F = 13, T = 4, V = 9;
  TrainingConfig cfg;
  cfg.discount = 0.9;
  cfg.entropy_coef = 0.01;
  cfg.value_coef = 0.5;
  Rng rng(12345);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    PolicyParams params = random_params(F, T, V, rng);
    std::vector<TrajectoryStep> batch = random_batch(10, F, T, V, rng);
    double bootstrap = 2.0 * rng.uniform() - 1.0;
    std::vector<double> grad = a2c_gradients(params, batch, bootstrap, cfg);
    REQUIRE(grad.size() == params.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
      PolicyParams plus = params;
      param_at(plus, i) += eps;
      PolicyParams minus = params;
      param_at(minus, i) -= eps;
      double fd = (a2c_loss(plus, batch, bootstrap, cfg).total -
                   a2c_loss(minus, batch, bootstrap, cfg).total) /
                  (2.0 * eps);
      double rel = std::abs(grad[i] - fd) / std::max(std::abs(grad[i]) + std::abs(fd), 1e-3);
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("a positive advantage pushes the chosen template logit up") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w, 32);
  PolicyParams params = PolicyParams::zeros(spec);
  TrainingConfig cfg;
  TrajectoryStep s;
  s.features.assign(static_cast<std::size_t>(spec.feature_dim()), 1.0);
  s.action = {3, {}};
  s.fill_candidates = spec.fallback_fills;
  s.value = 0.0;
  s.reward = 1.0;
  s.done = true;
  std::vector<TrajectoryStep> batch = {s};
  std::vector<double> grad = a2c_gradients(params, batch, 0.0, cfg);
  const int t_count = spec.num_templates;
  // Descent applies -lr * g, so the chosen column needs negative gradient
  // and the others positive.
  for (int f = 0; f < spec.feature_dim(); ++f) {
    for (int j = 0; j < t_count; ++j) {
      double g = grad[static_cast<std::size_t>(f) * static_cast<std::size_t>(t_count) +
                      static_cast<std::size_t>(j)];
      if (j == 3) {
        CHECK(g < 0.0);
      } else {
        CHECK(g > 0.0);
      }
    }
  }
}

TEST_CASE("a non-finite loss faults and leaves parameters unchanged") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w, 32);
  PolicyParams params = PolicyParams::zeros(spec);
  std::vector<std::uint8_t> before = save_params(params);
  TrainingConfig cfg;
  TrajectoryStep s;
  s.features.assign(static_cast<std::size_t>(spec.feature_dim()), 1.0);
  s.action = {0, {}};
  s.fill_candidates = spec.fallback_fills;
  s.reward = std::numeric_limits<double>::infinity();
  s.done = true;
  std::vector<TrajectoryStep> batch = {s};
  CHECK_THROWS_AS(a2c_update(params, batch, 0.0, cfg), AgentFault);
  CHECK(save_params(params) == before);
}

TEST_CASE("zero-parameter episodes on minigrue stay inside the frozen band") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w);
  PolicyParams params = PolicyParams::zeros(spec);
  TrainingConfig cfg;
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(splitmix64(seed));
    EpisodeResult ep = run_episode(w, spec, params, Variant::kWithKg, cfg, {}, rng);
    mean += static_cast<double>(ep.final_score);
  }
  mean /= 5.0;
  CHECK(mean >= -10.0);
  CHECK(mean <= 15.0);
}

TEST_CASE("episodes are reproducible for a fixed seed") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w);
  PolicyParams params = PolicyParams::zeros(spec);
  TrainingConfig cfg;
  Rng r1(42), r2(42);
  EpisodeResult a = run_episode(w, spec, params, Variant::kWithKg, cfg, {}, r1);
  EpisodeResult b = run_episode(w, spec, params, Variant::kWithKg, cfg, {}, r2);
  CHECK(a.actions_from_reset == b.actions_from_reset);
  CHECK(a.scores_after_action == b.scores_after_action);
  CHECK(a.final_score == b.final_score);
}

TEST_CASE("episodes started from a prefix count score from that state") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w);
  PolicyParams params = PolicyParams::zeros(spec);
  TrainingConfig cfg;
  std::vector<std::string> to_cellar = {"go north", "take lamp", "light lamp", "go down"};
  std::vector<TemplateAction> prefix = testutil::script(w, to_cellar);
  auto anchor = play(w, to_cellar);
  std::vector<std::uint8_t> blob = engine::snapshot(anchor.state);

  EpisodeOptions options;
  options.prefix = &prefix;
  options.expected_blob = &blob;
  options.max_steps = 5;
  Rng rng(9);
  EpisodeResult ep = run_episode(w, spec, params, Variant::kWithKg, cfg, options, rng);
  CHECK(ep.scores_after_action[prefix.size() - 1] == 35);
  CHECK(ep.final_score == ep.final_state.score);
  CHECK(ep.actions_from_reset.size() >= prefix.size());

  // A diverging expected blob faults.
  std::vector<std::uint8_t> wrong = engine::snapshot(play(w, {"go north"}).state);
  options.expected_blob = &wrong;
  Rng rng2(9);
  CHECK_THROWS_AS(run_episode(w, spec, params, Variant::kWithKg, cfg, options, rng2), AgentFault);
}

TEST_CASE("forced first actions are recorded as off-policy") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w);
  PolicyParams params = PolicyParams::zeros(spec);
  TrainingConfig cfg;
  EpisodeOptions options;
  options.forced_first = parse("open mailbox", w.vocab, w.templates);
  options.max_steps = 3;
  Rng rng(1);
  EpisodeResult ep = run_episode(w, spec, params, Variant::kWithKg, cfg, options, rng);
  REQUIRE(!ep.steps.empty());
  CHECK(ep.steps[0].action == *options.forced_first);
  CHECK(ep.steps[0].off_policy);
  for (std::size_t i = 1; i < ep.steps.size(); ++i) CHECK_FALSE(ep.steps[i].off_policy);
}

TEST_CASE("with-kg episodes only fill from the recorded candidate sets") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w);
  Rng rng(23);
  PolicyParams params = random_params(spec.feature_dim(), spec.num_templates, spec.vocab_size, rng);
  TrainingConfig cfg;
  for (int episode = 0; episode < 10; ++episode) {
    EpisodeResult ep = run_episode(w, spec, params, Variant::kWithKg, cfg, {}, rng);
    for (const TrajectoryStep& s : ep.steps) {
      for (int fill : s.action.fills) {
        CHECK(std::find(s.fill_candidates.begin(), s.fill_candidates.end(), fill) !=
              s.fill_candidates.end());
      }
    }
  }
}

TEST_CASE("parameter checkpoints roundtrip and validate shapes") {
  WorldSpec w = minigrue();
  AgentSpec spec = AgentSpec::make(w, 32);
  Rng rng(77);
  PolicyParams params = random_params(spec.feature_dim(), spec.num_templates, spec.vocab_size, rng);
  std::vector<std::uint8_t> blob = save_params(params);
  PolicyParams back = load_params(blob);
  CHECK(back == params);
  CHECK(save_params(back) == blob);

  std::vector<std::uint8_t> truncated(blob.begin(), blob.end() - 3);
  CHECK_THROWS_AS(load_params(truncated), DecodeError);
}

TEST_CASE("training config invariants are enforced") {
  TrainingConfig cfg;
  cfg.discount = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.discount = 1.0;
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.batch_size = 1;
  CHECK_NOTHROW(cfg.validate());
}
