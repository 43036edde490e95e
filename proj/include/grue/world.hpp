#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "grue/actions.hpp"

namespace grue {

struct WorldError : std::runtime_error {
  explicit WorldError(const std::string& what) : std::runtime_error(what) {}
};

// Where an object currently sits.
struct Location {
  enum class Kind : std::uint8_t { kRoom, kContainer, kInventory };
  Kind kind = Kind::kRoom;
  int index = 0;  // room index or container object index; unused for inventory

  friend bool operator==(const Location&, const Location&) = default;
};

struct Exit {
  int direction = -1;  // direction word id
  int target = -1;     // room index
  std::string requires_flag;  // exit is shut until this flag is set

  friend auto operator<=>(const Exit&, const Exit&) = default;
};

struct Room {
  std::string id;
  std::string name;
  std::string description;
  std::vector<Exit> exits;  // sorted by direction
  bool dark = false;
};

struct ObjectDef {
  std::string id;
  std::string noun;                     // single vocabulary word
  std::vector<std::string> adjectives;  // vocabulary words
  Location initial;
  bool portable = false;
  bool light_source = false;
  bool container = false;
  bool starts_open = false;  // containers without a lid start open
  std::string text;          // shown by examine/read; empty -> generic examine line
  int noun_word = -1;        // vocab id of noun
};

struct RewardRule {
  enum class Cond : std::uint8_t { kEnterRoom, kHasObject, kFlagSet };
  std::string id;
  Cond cond = Cond::kEnterRoom;
  int room = -1;     // kEnterRoom
  int object = -1;   // kHasObject
  std::string flag;  // kFlagSet
  std::int64_t points = 0;
  bool final = false;  // firing ends the episode
};

struct Hazard {
  int room = -1;
  bool requires_light = true;  // averted by a lit light source in inventory
  std::int64_t death_penalty = 0;
};

// Built-in behaviors the engine knows how to execute. Templates whose
// pattern is not in the behavior table act as always-failing decoys.
enum class Verb : std::uint8_t {
  kNone,
  kLook,
  kInventory,
  kWait,
  kGo,
  kOpen,
  kClose,
  kTake,
  kTakeFrom,
  kPutIn,
  kDrop,
  kLight,
  kExtinguish,
  kExamine,
  kRead,
};

struct WorldSpec {
  std::vector<Room> rooms;
  std::vector<ObjectDef> objects;
  std::vector<RewardRule> rewards;
  std::vector<Hazard> hazards;
  std::vector<Template> templates;
  std::vector<Verb> template_verbs;  // parallel to templates
  Vocabulary vocab;
  int start_room = 0;
  int max_steps = 0;

  std::unordered_map<std::string, int> room_index;
  std::unordered_map<std::string, int> object_index;

  int room_of(const std::string& id) const;
  int object_of(const std::string& id) const;
  // Sum of positive reward points: the best achievable score.
  std::int64_t max_score() const;
};

Verb verb_for_pattern(const std::string& pattern);

// Parses and validates a world document (JSON text). Errors carry the
// offending path.
WorldSpec load_world(const std::string& json_text);
WorldSpec load_world_file(const std::string& path);

}  // namespace grue
