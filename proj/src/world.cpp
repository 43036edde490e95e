#include "grue/world.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace grue {

using nlohmann::json;

int WorldSpec::room_of(const std::string& id) const {
  auto it = room_index.find(id);
  if (it == room_index.end()) throw WorldError("unknown room id: " + id);
  return it->second;
}

int WorldSpec::object_of(const std::string& id) const {
  auto it = object_index.find(id);
  if (it == object_index.end()) throw WorldError("unknown object id: " + id);
  return it->second;
}

std::int64_t WorldSpec::max_score() const {
  std::int64_t total = 0;
  for (const RewardRule& r : rewards)
    if (r.points > 0) total += r.points;
  return total;
}

Verb verb_for_pattern(const std::string& pattern) {
  static const std::map<std::string, Verb> table = {
      {"look", Verb::kLook},
      {"inventory", Verb::kInventory},
      {"wait", Verb::kWait},
      {"go __", Verb::kGo},
      {"open __", Verb::kOpen},
      {"close __", Verb::kClose},
      {"take __", Verb::kTake},
      {"get __", Verb::kTake},
      {"take __ from __", Verb::kTakeFrom},
      {"get __ from __", Verb::kTakeFrom},
      {"put __ in __", Verb::kPutIn},
      {"drop __", Verb::kDrop},
      {"light __", Verb::kLight},
      {"extinguish __", Verb::kExtinguish},
      {"examine __", Verb::kExamine},
      {"read __", Verb::kRead},
  };
  auto it = table.find(pattern);
  return it == table.end() ? Verb::kNone : it->second;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw WorldError(path + ": " + msg);
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) fail(path, std::string("missing required key '") + key + "'");
  return j.at(key);
}

std::string require_string(const json& j, const char* key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

Location parse_location(const WorldSpec& w, const std::string& loc, const std::string& path) {
  if (loc == "inventory") return {Location::Kind::kInventory, 0};
  if (auto it = w.room_index.find(loc); it != w.room_index.end())
    return {Location::Kind::kRoom, it->second};
  if (auto it = w.object_index.find(loc); it != w.object_index.end())
    return {Location::Kind::kContainer, it->second};
  fail(path, "dangling reference: location '" + loc + "' is not a room, container or 'inventory'");
}

void validate(const WorldSpec& w) {
  if (w.rooms.empty()) fail("rooms", "schema violation: empty rooms list");
  if (w.max_steps <= 0) fail("max_steps", "schema violation: must be positive");
  if (w.templates.empty()) fail("templates", "schema violation: empty template list");

  std::set<std::string> patterns;
  for (const Template& t : w.templates) {
    if (!patterns.insert(t.pattern()).second)
      fail("templates", "duplicate pattern: " + t.pattern());
  }

  for (std::size_t i = 0; i < w.objects.size(); ++i) {
    const ObjectDef& o = w.objects[i];
    const std::string path = "objects[" + std::to_string(i) + "]";
    if (o.noun_word < 0) fail(path, "noun '" + o.noun + "' missing from vocabulary");
    if (!w.vocab.has_tag(o.noun_word, Tag::kNoun) && !w.vocab.has_tag(o.noun_word, Tag::kProperNoun))
      fail(path, "noun '" + o.noun + "' is not noun-tagged in the vocabulary");
    for (const std::string& adj : o.adjectives) {
      int id = w.vocab.id_of(adj);
      if (id < 0 || !w.vocab.has_tag(id, Tag::kAdjective))
        fail(path, "adjective '" + adj + "' missing or not adjective-tagged");
    }
    if (o.initial.kind == Location::Kind::kContainer &&
        !w.objects[static_cast<std::size_t>(o.initial.index)].container)
      fail(path, "initial location '" + w.objects[static_cast<std::size_t>(o.initial.index)].id +
                     "' is not a container");
  }

  for (std::size_t i = 0; i < w.rooms.size(); ++i) {
    for (const Exit& exit : w.rooms[i].exits) {
      if (!w.vocab.has_tag(exit.direction, Tag::kDirection))
        fail("rooms[" + std::to_string(i) + "].exits",
             "exit key '" + w.vocab.words[static_cast<std::size_t>(exit.direction)] +
                 "' is not a direction");
    }
  }

  for (std::size_t i = 0; i < w.rewards.size(); ++i) {
    const RewardRule& r = w.rewards[i];
    const std::string path = "rewards[" + std::to_string(i) + "]";
    if (r.cond == RewardRule::Cond::kFlagSet && r.flag.empty()) fail(path, "empty flag name");
  }

  for (std::size_t i = 0; i < w.hazards.size(); ++i) {
    if (w.hazards[i].requires_light && !w.rooms[static_cast<std::size_t>(w.hazards[i].room)].dark)
      fail("hazards[" + std::to_string(i) + "]", "light-averted hazard in a room that is not dark");
  }

  // The knowledge-graph tracker probes objects with "examine OBJ".
  bool has_examine = false;
  for (const Template& t : w.templates)
    if (verb_for_pattern(t.pattern()) == Verb::kExamine) has_examine = true;
  if (!has_examine) fail("templates", "missing an 'examine __' template");
}

}  // namespace

WorldSpec load_world(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw WorldError(std::string("schema violation: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw WorldError("schema violation: top level must be an object");

  WorldSpec w;

  const json& jvocab = require(doc, "vocabulary", "");
  for (std::size_t i = 0; i < jvocab.size(); ++i) {
    const json& jw = jvocab.at(i);
    const std::string path = "vocabulary[" + std::to_string(i) + "]";
    std::string word = require_string(jw, "word", path);
    unsigned mask = 0;
    for (const json& t : require(jw, "tags", path)) {
      std::string tag = t.get<std::string>();
      if (tag == "noun") mask |= static_cast<unsigned>(Tag::kNoun);
      else if (tag == "proper-noun") mask |= static_cast<unsigned>(Tag::kProperNoun);
      else if (tag == "adjective") mask |= static_cast<unsigned>(Tag::kAdjective);
      else if (tag == "verb") mask |= static_cast<unsigned>(Tag::kVerb);
      else if (tag == "direction") mask |= static_cast<unsigned>(Tag::kDirection);
      else fail(path, "unknown tag: " + tag);
    }
    if (w.vocab.id_of(word) >= 0) fail(path, "duplicate word: " + word);
    w.vocab.add(word, mask);
  }

  const json& jtemplates = require(doc, "templates", "");
  for (std::size_t i = 0; i < jtemplates.size(); ++i) {
    if (!jtemplates.at(i).is_string()) fail("templates[" + std::to_string(i) + "]", "expected a string");
    Template t = Template::from_pattern(static_cast<int>(i), jtemplates.at(i).get<std::string>());
    // Fixed tokens must be parseable back; register them as vocabulary verbs.
    for (const std::string& tok : t.tokens)
      if (tok != "__" && w.vocab.id_of(tok) < 0) w.vocab.add(tok, static_cast<unsigned>(Tag::kVerb));
    w.template_verbs.push_back(verb_for_pattern(t.pattern()));
    w.templates.push_back(std::move(t));
  }

  const json& jrooms = require(doc, "rooms", "");
  if (!jrooms.is_array()) fail("rooms", "expected a list");
  if (jrooms.empty()) fail("rooms", "schema violation: empty rooms list");
  for (std::size_t i = 0; i < jrooms.size(); ++i) {
    const json& jr = jrooms.at(i);
    const std::string path = "rooms[" + std::to_string(i) + "]";
    Room r;
    r.id = require_string(jr, "id", path);
    r.name = require_string(jr, "name", path);
    r.description = require_string(jr, "description", path);
    r.dark = jr.value("dark", false);
    if (w.room_index.count(r.id)) fail(path, "duplicate room id: " + r.id);
    w.room_index.emplace(r.id, static_cast<int>(i));
    w.rooms.push_back(std::move(r));
  }

  const json& jobjects = require(doc, "objects", "");
  for (std::size_t i = 0; i < jobjects.size(); ++i) {
    const json& jo = jobjects.at(i);
    const std::string path = "objects[" + std::to_string(i) + "]";
    ObjectDef o;
    o.id = require_string(jo, "id", path);
    if (w.object_index.count(o.id)) fail(path, "duplicate object id: " + o.id);
    w.object_index.emplace(o.id, static_cast<int>(i));
    o.noun = require_string(jo, "noun", path);
    if (jo.contains("adjectives"))
      for (const json& a : jo.at("adjectives")) o.adjectives.push_back(a.get<std::string>());
    o.portable = jo.value("portable", false);
    o.light_source = jo.value("light_source", false);
    o.container = jo.value("container", false);
    o.starts_open = jo.value("starts_open", false);
    o.text = jo.value("text", std::string());
    o.noun_word = w.vocab.id_of(o.noun);
    w.objects.push_back(std::move(o));
  }
  // Initial locations resolve after all objects exist (containers may be
  // declared later than their contents).
  for (std::size_t i = 0; i < jobjects.size(); ++i) {
    const std::string path = "objects[" + std::to_string(i) + "].location";
    w.objects[i].initial =
        parse_location(w, require_string(jobjects.at(i), "location", "objects[" + std::to_string(i) + "]"), path);
  }

  for (std::size_t i = 0; i < jrooms.size(); ++i) {
    const json& jr = jrooms.at(i);
    if (!jr.contains("exits")) continue;
    for (const auto& [dir, target] : jr.at("exits").items()) {
      const std::string path = "rooms[" + std::to_string(i) + "].exits." + dir;
      int dir_id = w.vocab.id_of(dir);
      if (dir_id < 0) fail(path, "direction '" + dir + "' missing from vocabulary");
      Exit exit;
      exit.direction = dir_id;
      std::string room_id;
      if (target.is_string()) {
        room_id = target.get<std::string>();
      } else if (target.is_object()) {
        room_id = require_string(target, "to", path);
        exit.requires_flag = target.value("requires_flag", std::string());
      } else {
        fail(path, "expected a room id or {to, requires_flag} object");
      }
      auto it = w.room_index.find(room_id);
      if (it == w.room_index.end())
        fail(path, "dangling reference: exit to undeclared room '" + room_id + "'");
      exit.target = it->second;
      w.rooms[i].exits.push_back(std::move(exit));
    }
    std::sort(w.rooms[i].exits.begin(), w.rooms[i].exits.end());
  }

  if (doc.contains("rewards")) {
    const json& jrewards = doc.at("rewards");
    for (std::size_t i = 0; i < jrewards.size(); ++i) {
      const json& jr = jrewards.at(i);
      const std::string path = "rewards[" + std::to_string(i) + "]";
      RewardRule r;
      r.id = jr.value("id", "reward-" + std::to_string(i));
      const json& cond = require(jr, "condition", path);
      std::string type = require_string(cond, "type", path + ".condition");
      if (type == "enter_room") {
        r.cond = RewardRule::Cond::kEnterRoom;
        std::string room = require_string(cond, "room", path + ".condition");
        auto it = w.room_index.find(room);
        if (it == w.room_index.end()) fail(path, "dangling reference: room '" + room + "'");
        r.room = it->second;
      } else if (type == "has_object") {
        r.cond = RewardRule::Cond::kHasObject;
        std::string obj = require_string(cond, "object", path + ".condition");
        auto it = w.object_index.find(obj);
        if (it == w.object_index.end()) fail(path, "dangling reference: object '" + obj + "'");
        r.object = it->second;
      } else if (type == "flag_set") {
        r.cond = RewardRule::Cond::kFlagSet;
        r.flag = require_string(cond, "flag", path + ".condition");
      } else {
        fail(path + ".condition.type", "unknown condition type: " + type);
      }
      r.points = require(jr, "points", path).get<std::int64_t>();
      r.final = jr.value("final", false);
      w.rewards.push_back(std::move(r));
    }
  }

  if (doc.contains("hazards")) {
    const json& jhazards = doc.at("hazards");
    for (std::size_t i = 0; i < jhazards.size(); ++i) {
      const json& jh = jhazards.at(i);
      const std::string path = "hazards[" + std::to_string(i) + "]";
      Hazard h;
      std::string room = require_string(jh, "room", path);
      auto it = w.room_index.find(room);
      if (it == w.room_index.end()) fail(path, "dangling reference: room '" + room + "'");
      h.room = it->second;
      h.requires_light = jh.value("requires_light", true);
      h.death_penalty = require(jh, "death_penalty", path).get<std::int64_t>();
      w.hazards.push_back(h);
    }
  }

  std::string start = require_string(doc, "start_room", "");
  auto it = w.room_index.find(start);
  if (it == w.room_index.end()) throw WorldError("start_room: dangling reference: " + start);
  w.start_room = it->second;
  w.max_steps = require(doc, "max_steps", "").get<int>();

  validate(w);
  return w;
}

WorldSpec load_world_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WorldError("cannot open world file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_world(ss.str());
}

}  // namespace grue
