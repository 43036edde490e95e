#include "grue/engine.hpp"

#include <algorithm>

#include "grue/bytes.hpp"
#include "grue/hash.hpp"

namespace grue {

const std::string kFailureText = "Nothing happens.";

namespace engine {
namespace {

constexpr std::uint8_t kStateBlobVersion = 1;

std::string open_flag(const WorldSpec& w, int obj) { return w.objects[static_cast<std::size_t>(obj)].id + "-open"; }
std::string lit_flag(const WorldSpec& w, int obj) { return w.objects[static_cast<std::size_t>(obj)].id + "-lit"; }

bool flag_set(const GameState& s, const std::string& name) {
  auto it = s.flags.find(name);
  return it != s.flags.end() && it->second;
}

bool in_inventory(const GameState& s, int obj) {
  return s.object_locations[static_cast<std::size_t>(obj)].kind == Location::Kind::kInventory;
}

bool final_reward_fired(const WorldSpec& w, const GameState& s) {
  for (int idx : s.fired_rewards)
    if (w.rewards[static_cast<std::size_t>(idx)].final) return true;
  return false;
}

std::string with_adjectives(const WorldSpec& w, int obj) {
  const ObjectDef& o = w.objects[static_cast<std::size_t>(obj)];
  std::string out;
  for (const std::string& adj : o.adjectives) out += adj + " ";
  return out + o.noun;
}

// An object is visible when the player could refer to it: in inventory, on
// the floor of a lit current room, or inside an open container that is
// itself visible.
bool is_visible(const WorldSpec& w, const GameState& s, int obj) {
  const Location& loc = s.object_locations[static_cast<std::size_t>(obj)];
  switch (loc.kind) {
    case Location::Kind::kInventory:
      return true;
    case Location::Kind::kRoom:
      return loc.index == s.room && can_see(w, s);
    case Location::Kind::kContainer:
      return flag_set(s, open_flag(w, loc.index)) && is_visible(w, s, loc.index);
  }
  return false;
}

// Resolves a word to a visible object: noun match first, then a unique
// adjective match.
int resolve_object(const WorldSpec& w, const GameState& s, int word) {
  for (std::size_t i = 0; i < w.objects.size(); ++i) {
    if (w.objects[i].noun_word == word && is_visible(w, s, static_cast<int>(i)))
      return static_cast<int>(i);
  }
  int found = -1;
  const std::string& surface = w.vocab.words[static_cast<std::size_t>(word)];
  for (std::size_t i = 0; i < w.objects.size(); ++i) {
    if (!is_visible(w, s, static_cast<int>(i))) continue;
    if (std::find(w.objects[i].adjectives.begin(), w.objects[i].adjectives.end(), surface) !=
        w.objects[i].adjectives.end()) {
      if (found >= 0) return -1;  // ambiguous
      found = static_cast<int>(i);
    }
  }
  return found;
}

void remove_from_inventory(GameState& s, int obj) {
  s.inventory.erase(std::remove(s.inventory.begin(), s.inventory.end(), obj), s.inventory.end());
}

// Fires every not-yet-fired reward whose condition holds. Hazard deaths
// suppress reward checks for the fatal step (handled by the caller).
void fire_rewards(const WorldSpec& w, GameState& s) {
  for (std::size_t i = 0; i < w.rewards.size(); ++i) {
    int idx = static_cast<int>(i);
    if (s.fired_rewards.count(idx)) continue;
    const RewardRule& r = w.rewards[i];
    bool ok = false;
    switch (r.cond) {
      case RewardRule::Cond::kEnterRoom: ok = s.room == r.room; break;
      case RewardRule::Cond::kHasObject: ok = in_inventory(s, r.object); break;
      case RewardRule::Cond::kFlagSet: ok = flag_set(s, r.flag); break;
    }
    if (ok) {
      s.fired_rewards.insert(idx);
      s.score += r.points;
    }
  }
}

struct ExecResult {
  std::string text;
  bool moved = false;  // a movement happened (hazards apply)
};

ExecResult exec_go(const WorldSpec& w, GameState& s, int word) {
  const Room& room = w.rooms[static_cast<std::size_t>(s.room)];
  for (const Exit& exit : room.exits) {
    if (exit.direction != word) continue;
    if (!exit.requires_flag.empty() && !flag_set(s, exit.requires_flag)) break;
    s.room = exit.target;
    return {std::string(), true};
  }
  return {kFailureText, false};
}

ExecResult exec_open(const WorldSpec& w, GameState& s, int word) {
  int obj = resolve_object(w, s, word);
  if (obj < 0 || !w.objects[static_cast<std::size_t>(obj)].container) return {kFailureText, false};
  const std::string flag = open_flag(w, obj);
  if (flag_set(s, flag)) return {kFailureText, false};
  s.flags[flag] = true;
  std::string contents;
  for (std::size_t i = 0; i < w.objects.size(); ++i) {
    const Location& loc = s.object_locations[i];
    if (loc.kind == Location::Kind::kContainer && loc.index == obj) {
      if (!contents.empty()) contents += " and ";
      contents += "a " + w.objects[i].noun;
    }
  }
  std::string text = "Opening the " + with_adjectives(w, obj) + " reveals " +
                     (contents.empty() ? "nothing" : contents) + ".";
  return {text, false};
}

ExecResult exec_close(const WorldSpec& w, GameState& s, int word) {
  int obj = resolve_object(w, s, word);
  if (obj < 0 || !w.objects[static_cast<std::size_t>(obj)].container) return {kFailureText, false};
  const std::string flag = open_flag(w, obj);
  if (!flag_set(s, flag)) return {kFailureText, false};
  if (w.objects[static_cast<std::size_t>(obj)].starts_open) return {kFailureText, false};  // no lid
  s.flags[flag] = false;
  return {"Closed.", false};
}

ExecResult exec_take(const WorldSpec& w, GameState& s, int word, int container_word) {
  int obj = resolve_object(w, s, word);
  if (obj < 0 || !w.objects[static_cast<std::size_t>(obj)].portable) return {kFailureText, false};
  const Location& loc = s.object_locations[static_cast<std::size_t>(obj)];
  if (loc.kind == Location::Kind::kInventory) return {kFailureText, false};
  if (container_word >= 0) {
    int cont = resolve_object(w, s, container_word);
    if (cont < 0 || loc.kind != Location::Kind::kContainer || loc.index != cont)
      return {kFailureText, false};
  }
  s.object_locations[static_cast<std::size_t>(obj)] = {Location::Kind::kInventory, 0};
  s.inventory.push_back(obj);
  return {"Taken.", false};
}

ExecResult exec_put_in(const WorldSpec& w, GameState& s, int word, int container_word) {
  int obj = resolve_object(w, s, word);
  int cont = resolve_object(w, s, container_word);
  if (obj < 0 || cont < 0 || obj == cont) return {kFailureText, false};
  if (!in_inventory(s, obj)) return {kFailureText, false};
  if (!w.objects[static_cast<std::size_t>(cont)].container || !flag_set(s, open_flag(w, cont)))
    return {kFailureText, false};
  remove_from_inventory(s, obj);
  s.object_locations[static_cast<std::size_t>(obj)] = {Location::Kind::kContainer, cont};
  return {"Done.", false};
}

ExecResult exec_drop(const WorldSpec& w, GameState& s, int word) {
  int obj = resolve_object(w, s, word);
  if (obj < 0 || !in_inventory(s, obj)) return {kFailureText, false};
  remove_from_inventory(s, obj);
  s.object_locations[static_cast<std::size_t>(obj)] = {Location::Kind::kRoom, s.room};
  return {"Dropped.", false};
}

ExecResult exec_light(const WorldSpec& w, GameState& s, int word, bool on) {
  int obj = resolve_object(w, s, word);
  if (obj < 0 || !w.objects[static_cast<std::size_t>(obj)].light_source) return {kFailureText, false};
  if (!in_inventory(s, obj)) return {kFailureText, false};
  const std::string flag = lit_flag(w, obj);
  if (flag_set(s, flag) == on) return {kFailureText, false};
  s.flags[flag] = on;
  const std::string& noun = w.objects[static_cast<std::size_t>(obj)].noun;
  return {on ? "The " + noun + " is now lit." : "The " + noun + " is now off.", false};
}

ExecResult exec_examine(const WorldSpec& w, const GameState& s, int word) {
  int obj = resolve_object(w, s, word);
  if (obj < 0) return {kFailureText, false};
  const ObjectDef& o = w.objects[static_cast<std::size_t>(obj)];
  if (!o.text.empty()) return {o.text, false};
  return {"You see nothing special about the " + o.noun + ".", false};
}

ExecResult exec_read(const WorldSpec& w, const GameState& s, int word) {
  int obj = resolve_object(w, s, word);
  if (obj < 0 || w.objects[static_cast<std::size_t>(obj)].text.empty()) return {kFailureText, false};
  return {w.objects[static_cast<std::size_t>(obj)].text, false};
}

std::string inventory_text(const WorldSpec& w, const GameState& s) {
  if (s.inventory.empty()) return "You are empty-handed.";
  std::string out = "You are carrying:";
  for (int obj : s.inventory) out += " a " + w.objects[static_cast<std::size_t>(obj)].noun + ",";
  out.back() = '.';
  return out;
}

}  // namespace

bool can_see(const WorldSpec& world, const GameState& state) {
  const Room& room = world.rooms[static_cast<std::size_t>(state.room)];
  if (!room.dark) return true;
  for (std::size_t i = 0; i < world.objects.size(); ++i) {
    if (!world.objects[i].light_source) continue;
    if (!flag_set(state, lit_flag(world, static_cast<int>(i)))) continue;
    const Location& loc = state.object_locations[i];
    if (loc.kind == Location::Kind::kInventory ||
        (loc.kind == Location::Kind::kRoom && loc.index == state.room))
      return true;
  }
  return false;
}

bool is_done(const WorldSpec& world, const GameState& state) {
  return !state.alive || state.steps >= world.max_steps || final_reward_fired(world, state);
}

std::string room_observation(const WorldSpec& world, const GameState& state) {
  if (!can_see(world, state))
    return "It is pitch black. You are likely to be eaten by a grue.";
  const Room& room = world.rooms[static_cast<std::size_t>(state.room)];
  std::string text = room.name + "\n" + room.description;
  for (std::size_t i = 0; i < world.objects.size(); ++i) {
    const Location& loc = state.object_locations[i];
    if (loc.kind == Location::Kind::kRoom && loc.index == state.room)
      text += "\nThere is a " + with_adjectives(world, static_cast<int>(i)) + " here.";
  }
  for (std::size_t i = 0; i < world.objects.size(); ++i) {
    const Location& loc = state.object_locations[i];
    if (loc.kind == Location::Kind::kContainer && is_visible(world, state, static_cast<int>(i))) {
      const Location& cont_loc = state.object_locations[static_cast<std::size_t>(loc.index)];
      bool cont_here = (cont_loc.kind == Location::Kind::kRoom && cont_loc.index == state.room);
      if (cont_here)
        text += "\nThere is a " + with_adjectives(world, static_cast<int>(i)) + " in the " +
                world.objects[static_cast<std::size_t>(loc.index)].noun + ".";
    }
  }
  return text;
}

std::pair<GameState, Observation> reset(const WorldSpec& world, std::uint64_t seed) {
  (void)seed;  // reserved for stochastic worlds; current worlds are deterministic
  GameState s;
  s.room = world.start_room;
  s.object_locations.reserve(world.objects.size());
  for (std::size_t i = 0; i < world.objects.size(); ++i) {
    s.object_locations.push_back(world.objects[i].initial);
    if (world.objects[i].initial.kind == Location::Kind::kInventory)
      s.inventory.push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < world.objects.size(); ++i) {
    if (world.objects[i].container)
      s.flags[open_flag(world, static_cast<int>(i))] = world.objects[i].starts_open;
    if (world.objects[i].light_source) s.flags[lit_flag(world, static_cast<int>(i))] = false;
  }
  Observation obs;
  obs.text = room_observation(world, s);
  obs.done = is_done(world, s);
  obs.score = s.score;
  return {std::move(s), std::move(obs)};
}

std::pair<GameState, Observation> step(const WorldSpec& world, const GameState& state,
                                       const TemplateAction& action) {
  if (is_done(world, state))
    throw EngineFault("step() called on a done state");

  GameState s = state;
  const std::int64_t score_before = s.score;
  const Verb verb = world.template_verbs.at(static_cast<std::size_t>(action.template_id));
  const Template& tmpl = world.templates.at(static_cast<std::size_t>(action.template_id));
  if (static_cast<int>(action.fills.size()) != tmpl.arity)
    throw EngineFault("action fill count does not match template arity");

  ExecResult r{kFailureText, false};
  switch (verb) {
    case Verb::kLook: r = {room_observation(world, s), false}; break;
    case Verb::kInventory: r = {inventory_text(world, s), false}; break;
    case Verb::kWait: r = {"Time passes.", false}; break;
    case Verb::kGo:
      if (world.vocab.has_tag(action.fills[0], Tag::kDirection)) r = exec_go(world, s, action.fills[0]);
      break;
    case Verb::kOpen: r = exec_open(world, s, action.fills[0]); break;
    case Verb::kClose: r = exec_close(world, s, action.fills[0]); break;
    case Verb::kTake: r = exec_take(world, s, action.fills[0], -1); break;
    case Verb::kTakeFrom: r = exec_take(world, s, action.fills[0], action.fills[1]); break;
    case Verb::kPutIn: r = exec_put_in(world, s, action.fills[0], action.fills[1]); break;
    case Verb::kDrop: r = exec_drop(world, s, action.fills[0]); break;
    case Verb::kLight: r = exec_light(world, s, action.fills[0], true); break;
    case Verb::kExtinguish: r = exec_light(world, s, action.fills[0], false); break;
    case Verb::kExamine: r = exec_examine(world, s, action.fills[0]); break;
    case Verb::kRead: r = exec_read(world, s, action.fills[0]); break;
    case Verb::kNone: break;
  }

  s.steps += 1;

  std::string text = r.text;
  if (r.moved) {
    bool killed = false;
    for (const Hazard& h : world.hazards) {
      if (h.room != s.room) continue;
      bool lit = false;
      if (h.requires_light) {
        for (int obj : s.inventory) {
          if (world.objects[static_cast<std::size_t>(obj)].light_source &&
              flag_set(s, lit_flag(world, obj)))
            lit = true;
        }
      }
      if (!lit) {
        killed = true;
        s.alive = false;
        s.score -= h.death_penalty;
        break;
      }
    }
    if (killed) {
      text =
          "Oh, no! You have walked into the slavering fangs of a lurking grue!\n"
          "**** You have died ****";
    } else {
      fire_rewards(world, s);
      text = room_observation(world, s);
    }
  } else {
    fire_rewards(world, s);
  }

  Observation obs;
  obs.text = std::move(text);
  obs.reward_delta = s.score - score_before;
  obs.done = is_done(world, s);
  obs.score = s.score;
  return {std::move(s), std::move(obs)};
}

std::vector<std::uint8_t> snapshot(const GameState& state) {
  ByteWriter w;
  w.u8(kStateBlobVersion);
  w.u32(static_cast<std::uint32_t>(state.room));
  w.u32(static_cast<std::uint32_t>(state.inventory.size()));
  for (int obj : state.inventory) w.u32(static_cast<std::uint32_t>(obj));
  w.u32(static_cast<std::uint32_t>(state.object_locations.size()));
  for (const Location& loc : state.object_locations) {
    w.u8(static_cast<std::uint8_t>(loc.kind));
    w.u32(static_cast<std::uint32_t>(loc.index));
  }
  w.u32(static_cast<std::uint32_t>(state.flags.size()));
  for (const auto& [name, value] : state.flags) {
    w.str(name);
    w.u8(value ? 1 : 0);
  }
  w.i64(state.score);
  w.u32(static_cast<std::uint32_t>(state.steps));
  w.u8(state.alive ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(state.fired_rewards.size()));
  for (int idx : state.fired_rewards) w.u32(static_cast<std::uint32_t>(idx));
  return w.take();
}

GameState restore(const std::vector<std::uint8_t>& blob) {
  ByteReader r(blob);
  if (r.u8() != kStateBlobVersion) throw DecodeError("unsupported state blob version");
  GameState s;
  s.room = static_cast<int>(r.u32());
  std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) s.inventory.push_back(static_cast<int>(r.u32()));
  n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    Location loc;
    std::uint8_t kind = r.u8();
    if (kind > 2) throw DecodeError("bad location kind");
    loc.kind = static_cast<Location::Kind>(kind);
    loc.index = static_cast<int>(r.u32());
    s.object_locations.push_back(loc);
  }
  n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.str();
    s.flags[name] = r.u8() != 0;
  }
  s.score = r.i64();
  s.steps = static_cast<int>(r.u32());
  s.alive = r.u8() != 0;
  n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) s.fired_rewards.insert(static_cast<int>(r.u32()));
  r.expect_end();
  return s;
}

std::uint64_t state_hash(const GameState& state) {
  Hasher h;
  h.mix_u32(static_cast<std::uint32_t>(state.room));
  h.mix_u32(static_cast<std::uint32_t>(state.inventory.size()));
  for (int obj : state.inventory) h.mix_u32(static_cast<std::uint32_t>(obj));
  for (const Location& loc : state.object_locations) {
    h.mix_u8(static_cast<std::uint8_t>(loc.kind));
    h.mix_u32(static_cast<std::uint32_t>(loc.index));
  }
  for (const auto& [name, value] : state.flags) {
    h.mix(name);
    h.mix_u8(value ? 1 : 0);
  }
  h.mix_i64(state.score);
  // steps intentionally excluded: cell identity reflects the situation, not time
  h.mix_u8(state.alive ? 1 : 0);
  for (int idx : state.fired_rewards) h.mix_u32(static_cast<std::uint32_t>(idx));
  return h.digest();
}

}  // namespace engine
}  // namespace grue
