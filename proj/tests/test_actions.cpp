#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "grue/rng.hpp"
#include "test_util.hpp"

using namespace grue;
using testutil::minigrue;
using testutil::play;
using testutil::tinyworld;

namespace {

int template_id(const WorldSpec& w, const std::string& pattern) {
  for (const Template& t : w.templates)
    if (t.pattern() == pattern) return t.id;
  REQUIRE(false);
  return -1;
}

}  // namespace

TEST_CASE("render substitutes blanks left to right") {
  WorldSpec w = minigrue();
  int egg = w.vocab.id_of("egg");
  int nest = w.vocab.id_of("nest");
  int down = w.vocab.id_of("down");
  CHECK(render({template_id(w, "take __ from __"), {egg, nest}}, w.vocab, w.templates) ==
        "take egg from nest");
  CHECK(render({template_id(w, "go __"), {down}}, w.vocab, w.templates) == "go down");
  CHECK(render({template_id(w, "look"), {}}, w.vocab, w.templates) == "look");
  CHECK_THROWS_AS(render({template_id(w, "go __"), {}}, w.vocab, w.templates), ParseError);
}

TEST_CASE("parse inverts render and reports unknown verbs and words") {
  WorldSpec w = minigrue();
  TemplateAction a = parse("take egg from nest", w.vocab, w.templates);
  CHECK(a.template_id == template_id(w, "take __ from __"));
  CHECK(a.fills == std::vector<int>{w.vocab.id_of("egg"), w.vocab.id_of("nest")});

  CHECK_THROWS_AS(parse("frobnicate egg", w.vocab, w.templates), ParseError);
  try {
    parse("frobnicate egg", w.vocab, w.templates);
  } catch (const ParseError& e) {
    CHECK(e.kind == ParseError::Kind::kUnrecognizedVerb);
  }
  try {
    parse("take xyzzy", w.vocab, w.templates);
  } catch (const ParseError& e) {
    CHECK(e.kind == ParseError::Kind::kUnknownWord);
  }
}

TEST_CASE("parse(render(a)) == a over the whole enumeration") {
  WorldSpec w = minigrue();
  for (const TemplateAction& a : enumerate_actions(w.templates, oracle_fill_words(w.vocab))) {
    CAPTURE(render(a, w.vocab, w.templates));
    CHECK(parse(render(a, w.vocab, w.templates), w.vocab, w.templates) == a);
  }
}

TEST_CASE("template action space arithmetic matches the closed form") {
  // 237 two-blank templates over a 697-word vocabulary.
  std::vector<Template> templates;
  for (int i = 0; i < 237; ++i) templates.push_back(Template::from_pattern(i, "verb __ prep __"));
  CHECK(action_space_size(templates, 697) == 115136733ull);  // ~1.15e8

  std::vector<Template> one = {Template::from_pattern(0, "look")};
  CHECK(action_space_size(one, 697) == 1ull);

  // Five-word commands over the same vocabulary: ~1.64e14.
  std::uint64_t expected = 1;
  for (int i = 0; i < 5; ++i) expected *= 697ull;
  CHECK(word_space_size(697, 5) == expected);
  CHECK(word_space_size(697, 5) == 164499237983257ull);
}

TEST_CASE("action_space_size equals the literal enumeration count on small vocabularies") {
  WorldSpec w = tinyworld();
  for (int vocab_size = 1; vocab_size <= 10; ++vocab_size) {
    std::vector<int> words;
    for (int i = 0; i < vocab_size; ++i) words.push_back(i);
    CHECK(enumerate_actions(w.templates, words).size() ==
          action_space_size(w.templates, vocab_size));
  }
}

TEST_CASE("admissible actions at the start include real moves and exclude no-ops") {
  WorldSpec w = minigrue();
  auto [s, o] = engine::reset(w);
  (void)o;
  std::vector<TemplateAction> adm = admissible_actions(w, s);
  auto contains = [&](const std::string& text) {
    TemplateAction a = parse(text, w.vocab, w.templates);
    return std::find(adm.begin(), adm.end(), a) != adm.end();
  };
  CHECK(contains("open mailbox"));
  CHECK(contains("go north"));
  CHECK_FALSE(contains("eat mailbox"));
  CHECK_FALSE(contains("take egg"));  // the egg is in the kitchen, not here
  CHECK_FALSE(contains("look"));
  CHECK_FALSE(contains("examine mailbox"));
  CHECK(adm.size() <= 100);  // of the order of 1e2 per step
  CHECK(std::is_sorted(adm.begin(), adm.end()));
}

TEST_CASE("a done state has no admissible actions") {
  WorldSpec w = minigrue();
  auto p = play(w, {"go north", "go down"});  // killed by the grue
  CHECK_FALSE(p.state.alive);
  CHECK(admissible_actions(w, p.state).empty());
  CHECK(admissible_actions_serial(w, p.state).empty());
}

TEST_CASE("parallel oracle matches the serial reference on walkthrough states") {
  WorldSpec w = minigrue();
  std::vector<std::string> prefix;
  auto check_state = [&](const GameState& s) {
    CHECK(admissible_actions(w, s) == admissible_actions_serial(w, s));
  };
  check_state(play(w, prefix).state);
  for (const std::string& line : testutil::minigrue_walkthrough()) {
    prefix.push_back(line);
    check_state(play(w, prefix).state);
  }
}

TEST_CASE("oracle soundness and completeness, exhaustively on the tiny world") {
  WorldSpec w = tinyworld();
  std::vector<TemplateAction> all = enumerate_actions(w.templates, oracle_fill_words(w.vocab));

  // Every reachable state: each enumerated action is admissible exactly
  // when stepping it changes the state hash or the score.
  std::set<std::uint64_t> seen;
  std::vector<GameState> frontier;
  auto [start, obs] = engine::reset(w);
  (void)obs;
  seen.insert(engine::state_hash(start));
  frontier.push_back(std::move(start));
  int states_checked = 0;
  while (!frontier.empty()) {
    GameState s = std::move(frontier.back());
    frontier.pop_back();
    std::vector<TemplateAction> adm = admissible_actions(w, s);
    ++states_checked;
    for (const TemplateAction& a : all) {
      auto [n, o] = engine::step(w, s, a);
      (void)o;
      bool changes = engine::state_hash(n) != engine::state_hash(s) || n.score != s.score;
      bool listed = std::binary_search(adm.begin(), adm.end(), a);
      CAPTURE(render(a, w.vocab, w.templates));
      CHECK(changes == listed);
      if (changes && !engine::is_done(w, n) && seen.insert(engine::state_hash(n)).second)
        frontier.push_back(std::move(n));
    }
  }
  CHECK(states_checked > 20);
}
