#include "grue/kg.hpp"

#include <algorithm>

#include "grue/hash.hpp"

namespace grue {
namespace kg {

namespace {

constexpr const char* kYou = "you";

int find_examine_template(const WorldSpec& world) {
  for (std::size_t i = 0; i < world.templates.size(); ++i)
    if (world.template_verbs[i] == Verb::kExamine) return static_cast<int>(i);
  return -1;
}

int find_object_by_noun(const WorldSpec& world, const std::string& noun) {
  for (std::size_t i = 0; i < world.objects.size(); ++i)
    if (world.objects[i].noun == noun) return static_cast<int>(i);
  return -1;
}

}  // namespace

std::vector<std::string> extract_candidates(const std::string& text, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (const std::string& tok : tokenize(text)) {
    int id = vocab.id_of(tok);
    if (id < 0) continue;
    if (!vocab.has_tag(id, Tag::kNoun) && !vocab.has_tag(id, Tag::kProperNoun) &&
        !vocab.has_tag(id, Tag::kAdjective))
      continue;
    if (std::find(out.begin(), out.end(), tok) == out.end()) out.push_back(tok);
  }
  return out;
}

std::vector<std::string> filter_interactive(const std::vector<std::string>& candidates,
                                            const WorldSpec& world, const GameState& state) {
  std::vector<std::string> out;
  if (engine::is_done(world, state)) return out;
  const int examinec = find_examine_template(world);
  if (examinec < 0) return out;
  for (const std::string& cand : candidates) {
    int word = world.vocab.id_of(cand);
    if (word < 0) continue;
    // Probe on a copy; step() never mutates its input state.
    auto [next, obs] = engine::step(world, state, TemplateAction{examinec, {word}});
    (void)next;
    if (obs.text != kFailureText) out.push_back(cand);
  }
  return out;
}

KnowledgeGraph update_graph(const KnowledgeGraph& graph, const std::string& observation,
                            const std::optional<TemplateAction>& prev_action,
                            const WorldSpec& world, const GameState& state) {
  KnowledgeGraph g = graph;
  const std::string prev_room = g.current_room;
  const std::string& room_id = world.rooms[static_cast<std::size_t>(state.room)].id;

  // 1. you-in link, replaced rather than accumulated.
  for (auto it = g.triples.begin(); it != g.triples.end();) {
    if (it->subject == kYou && it->relation == "in")
      it = g.triples.erase(it);
    else
      ++it;
  }
  g.triples.insert({kYou, "in", room_id});
  g.current_room = room_id;

  // 2. Interactive objects from the observation; non-inventory ones link to
  // the current room, adjectives attach to their object.
  std::vector<std::string> candidates = extract_candidates(observation, world.vocab);
  std::vector<std::string> interactive = filter_interactive(candidates, world, state);
  for (const std::string& word : interactive) {
    int obj = find_object_by_noun(world, word);
    if (obj < 0) continue;  // adjective candidates are handled through their object
    const Location& loc = state.object_locations[static_cast<std::size_t>(obj)];
    if (loc.kind != Location::Kind::kInventory) g.triples.insert({room_id, "has", word});
    for (const std::string& adj : world.objects[static_cast<std::size_t>(obj)].adjectives) {
      if (std::find(candidates.begin(), candidates.end(), adj) != candidates.end())
        g.triples.insert({word, "is", adj});
    }
  }

  // 3. Inventory items link to "you"; their room links are removed. Stale
  // "you has" links for dropped items are removed as well.
  std::set<std::string> inventory_nouns;
  for (int obj : state.inventory) inventory_nouns.insert(world.objects[static_cast<std::size_t>(obj)].noun);
  for (auto it = g.triples.begin(); it != g.triples.end();) {
    const bool stale_you_has =
        it->subject == kYou && it->relation == "has" && !inventory_nouns.count(it->object);
    const bool room_link_of_carried =
        it->relation == "has" && it->subject != kYou && inventory_nouns.count(it->object);
    if (stale_you_has || room_link_of_carried)
      it = g.triples.erase(it);
    else
      ++it;
  }
  for (const std::string& noun : inventory_nouns) g.triples.insert({kYou, "has", noun});

  // 4. Navigation triple when the previous action moved between rooms.
  if (prev_action && !prev_room.empty() && prev_room != room_id) {
    const Verb verb = world.template_verbs.at(static_cast<std::size_t>(prev_action->template_id));
    if (verb == Verb::kGo && prev_action->fills.size() == 1) {
      const std::string& dir = world.vocab.words[static_cast<std::size_t>(prev_action->fills[0])];
      g.triples.insert({prev_room, dir, room_id});
    }
  }

  return g;
}

GraphMask graph_mask(const KnowledgeGraph& graph, const Vocabulary& vocab) {
  GraphMask mask;
  auto consider = [&](const std::string& part) {
    int id = vocab.id_of(part);
    if (id >= 0 && (vocab.has_tag(id, Tag::kNoun) || vocab.has_tag(id, Tag::kProperNoun)))
      mask.insert(id);
  };
  for (const Triple& t : graph.triples) {
    consider(t.subject);
    consider(t.relation);
    consider(t.object);
  }
  return mask;
}

std::uint64_t canonical_hash(const KnowledgeGraph& graph) {
  // std::set iterates in sorted order, so sequential folding is canonical.
  Hasher h;
  h.mix_u64(graph.triples.size());
  for (const Triple& t : graph.triples) {
    h.mix(t.subject);
    h.mix(t.relation);
    h.mix(t.object);
  }
  return h.digest();
}

std::string dump(const KnowledgeGraph& graph) {
  std::string out;
  for (const Triple& t : graph.triples)
    out += t.subject + "\t" + t.relation + "\t" + t.object + "\n";
  return out;
}

}  // namespace kg
}  // namespace grue
