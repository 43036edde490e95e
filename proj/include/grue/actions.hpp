#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace grue {

// Lexical tags carried by vocabulary words. A word may hold several.
enum class Tag : unsigned {
  kNoun = 1u << 0,
  kProperNoun = 1u << 1,
  kAdjective = 1u << 2,
  kVerb = 1u << 3,
  kDirection = 1u << 4,
};

struct Vocabulary {
  std::vector<std::string> words;   // id -> surface form, ids dense 0..N-1
  std::vector<unsigned> tags;       // id -> tag bitmask
  std::unordered_map<std::string, int> index;

  int add(const std::string& word, unsigned tag_mask);
  // -1 if unknown.
  int id_of(const std::string& word) const;
  bool has_tag(int id, Tag t) const {
    return (tags[static_cast<std::size_t>(id)] & static_cast<unsigned>(t)) != 0u;
  }
  int size() const { return static_cast<int>(words.size()); }
  // Word ids carrying any of the given tags, ascending.
  std::vector<int> ids_with_tags(unsigned tag_mask) const;
};

// A verb pattern with 0-2 blanks, e.g. "take __ from __". Blanks are
// filled left to right with single vocabulary words.
struct Template {
  int id = 0;
  std::vector<std::string> tokens;  // fixed words and "__" blank markers
  int arity = 0;

  std::string pattern() const;
  static Template from_pattern(int id, const std::string& pattern);
};

struct TemplateAction {
  int template_id = 0;
  std::vector<int> fills;  // word ids, length == template arity

  friend bool operator==(const TemplateAction&, const TemplateAction&) = default;
  friend auto operator<=>(const TemplateAction&, const TemplateAction&) = default;
};

struct ParseError : std::runtime_error {
  enum class Kind { kUnrecognizedVerb, kUnknownWord, kArityMismatch };
  ParseError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
  Kind kind;
};

// Lowercased alphanumeric token runs; punctuation and hyphens split.
std::vector<std::string> tokenize(const std::string& text);

std::string render(const TemplateAction& action, const Vocabulary& vocab,
                   const std::vector<Template>& templates);

// Leftmost-longest match: templates with more fixed tokens win, then lower id.
TemplateAction parse(const std::string& text, const Vocabulary& vocab,
                     const std::vector<Template>& templates);

// Sum over templates of |vocab|^arity.
std::uint64_t action_space_size(const std::vector<Template>& templates, int vocab_size);

// |vocab|^max_words: the unconstrained word-sequence space.
std::uint64_t word_space_size(int vocab_size, int max_words);

// Every (template, fills) combination with fills drawn from `fill_words`
// (pass all word ids for the literal full space). Canonical order:
// template id, then fill ids lexicographically.
std::vector<TemplateAction> enumerate_actions(const std::vector<Template>& templates,
                                              const std::vector<int>& fill_words);

// Fill candidates used by the admissibility oracle: noun / proper-noun /
// adjective / direction tagged words.
std::vector<int> oracle_fill_words(const Vocabulary& vocab);

}  // namespace grue
