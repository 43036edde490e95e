#include "grue/actions.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace grue {

int Vocabulary::add(const std::string& word, unsigned tag_mask) {
  auto it = index.find(word);
  if (it != index.end()) {
    tags[static_cast<std::size_t>(it->second)] |= tag_mask;
    return it->second;
  }
  int id = static_cast<int>(words.size());
  words.push_back(word);
  tags.push_back(tag_mask);
  index.emplace(word, id);
  return id;
}

int Vocabulary::id_of(const std::string& word) const {
  auto it = index.find(word);
  return it == index.end() ? -1 : it->second;
}

std::vector<int> Vocabulary::ids_with_tags(unsigned tag_mask) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if ((tags[static_cast<std::size_t>(i)] & tag_mask) != 0u) out.push_back(i);
  }
  return out;
}

std::string Template::pattern() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

Template Template::from_pattern(int id, const std::string& pattern) {
  Template t;
  t.id = id;
  std::istringstream in(pattern);
  std::string tok;
  while (in >> tok) {
    if (tok == "__") ++t.arity;
    t.tokens.push_back(tok);
  }
  if (t.tokens.empty()) throw std::invalid_argument("empty template pattern");
  if (t.arity > 2) throw std::invalid_argument("template arity > 2: " + pattern);
  return t;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string render(const TemplateAction& action, const Vocabulary& vocab,
                   const std::vector<Template>& templates) {
  const Template& t = templates.at(static_cast<std::size_t>(action.template_id));
  if (static_cast<int>(action.fills.size()) != t.arity) {
    throw ParseError(ParseError::Kind::kArityMismatch,
                     "fill count " + std::to_string(action.fills.size()) +
                         " does not match arity of '" + t.pattern() + "'");
  }
  std::string out;
  std::size_t next_fill = 0;
  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    if (i) out += ' ';
    if (t.tokens[i] == "__") {
      out += vocab.words.at(static_cast<std::size_t>(action.fills[next_fill++]));
    } else {
      out += t.tokens[i];
    }
  }
  return out;
}

namespace {

// A template matches when token counts agree, fixed tokens are equal and
// blank positions hold known vocabulary words.
std::optional<TemplateAction> try_match(const Template& t, const std::vector<std::string>& toks,
                                        const Vocabulary& vocab, bool& unknown_word) {
  if (toks.size() != t.tokens.size()) return std::nullopt;
  TemplateAction a;
  a.template_id = t.id;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (t.tokens[i] == "__") {
      int w = vocab.id_of(toks[i]);
      if (w < 0) {
        unknown_word = true;
        return std::nullopt;
      }
      a.fills.push_back(w);
    } else if (t.tokens[i] != toks[i]) {
      return std::nullopt;
    }
  }
  return a;
}

}  // namespace

TemplateAction parse(const std::string& text, const Vocabulary& vocab,
                     const std::vector<Template>& templates) {
  std::vector<std::string> toks = tokenize(text);
  if (toks.empty()) {
    throw ParseError(ParseError::Kind::kUnrecognizedVerb, "empty action text");
  }
  std::optional<TemplateAction> best;
  int best_fixed = -1;
  bool verb_seen = false;
  bool unknown_word = false;
  for (const Template& t : templates) {
    if (t.tokens.front() == toks.front()) verb_seen = true;
    bool unk = false;
    auto m = try_match(t, toks, vocab, unk);
    unknown_word = unknown_word || unk;
    if (!m) continue;
    int fixed = static_cast<int>(t.tokens.size()) - t.arity;
    if (fixed > best_fixed) {
      best_fixed = fixed;
      best = std::move(m);
    }
  }
  if (best) return *best;
  if (!verb_seen) {
    throw ParseError(ParseError::Kind::kUnrecognizedVerb, "unrecognized verb: " + toks.front());
  }
  if (unknown_word) {
    throw ParseError(ParseError::Kind::kUnknownWord, "unknown word in: " + text);
  }
  throw ParseError(ParseError::Kind::kUnrecognizedVerb, "no template matches: " + text);
}

std::uint64_t action_space_size(const std::vector<Template>& templates, int vocab_size) {
  std::uint64_t total = 0;
  for (const Template& t : templates) {
    std::uint64_t n = 1;
    for (int i = 0; i < t.arity; ++i) n *= static_cast<std::uint64_t>(vocab_size);
    total += n;
  }
  return total;
}

std::uint64_t word_space_size(int vocab_size, int max_words) {
  std::uint64_t n = 1;
  for (int i = 0; i < max_words; ++i) n *= static_cast<std::uint64_t>(vocab_size);
  return n;
}

std::vector<TemplateAction> enumerate_actions(const std::vector<Template>& templates,
                                              const std::vector<int>& fill_words) {
  std::vector<int> sorted_fills = fill_words;
  std::sort(sorted_fills.begin(), sorted_fills.end());
  std::vector<TemplateAction> out;
  for (const Template& t : templates) {
    switch (t.arity) {
      case 0:
        out.push_back({t.id, {}});
        break;
      case 1:
        for (int w : sorted_fills) out.push_back({t.id, {w}});
        break;
      case 2:
        for (int w1 : sorted_fills)
          for (int w2 : sorted_fills) out.push_back({t.id, {w1, w2}});
        break;
      default:
        break;
    }
  }
  return out;
}

std::vector<int> oracle_fill_words(const Vocabulary& vocab) {
  return vocab.ids_with_tags(static_cast<unsigned>(Tag::kNoun) |
                             static_cast<unsigned>(Tag::kProperNoun) |
                             static_cast<unsigned>(Tag::kAdjective) |
                             static_cast<unsigned>(Tag::kDirection));
}

}  // namespace grue
