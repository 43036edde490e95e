#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "grue/engine.hpp"

namespace grue {

struct Triple {
  std::string subject;
  std::string relation;
  std::string object;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Accumulated world map: rooms, objects, inventory, room adjacency.
// Triples persist across rooms within an episode; "you in" and "you has"
// links track the current situation.
struct KnowledgeGraph {
  std::set<Triple> triples;
  std::string current_room;  // empty until the first update

  friend bool operator==(const KnowledgeGraph&, const KnowledgeGraph&) = default;
};

// Word ids of entities currently present in the graph; constrains template
// fills for the with-kg agents.
using GraphMask = std::set<int>;

namespace kg {

// Tokens tagged noun/proper-noun/adjective, order of first appearance,
// deduplicated.
std::vector<std::string> extract_candidates(const std::string& text, const Vocabulary& vocab);

// Keeps candidates for which "examine X" on a snapshot yields a non-failure
// observation. The probe never mutates the given state.
std::vector<std::string> filter_interactive(const std::vector<std::string>& candidates,
                                            const WorldSpec& world, const GameState& state);

// Applies the update rules in order: you-in link, room links for
// interactive non-inventory objects (with <obj, is, adj> attributes),
// inventory links, and a navigation triple when prev_action moved rooms.
KnowledgeGraph update_graph(const KnowledgeGraph& graph, const std::string& observation,
                            const std::optional<TemplateAction>& prev_action,
                            const WorldSpec& world, const GameState& state);

// All noun-tagged word ids appearing in graph triples.
GraphMask graph_mask(const KnowledgeGraph& graph, const Vocabulary& vocab);

// Order-independent 64-bit digest of the triple set.
std::uint64_t canonical_hash(const KnowledgeGraph& graph);

// One triple per line, tab separated, canonically sorted.
std::string dump(const KnowledgeGraph& graph);

}  // namespace kg
}  // namespace grue
