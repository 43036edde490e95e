#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "grue/world.hpp"

namespace grue {

struct EngineFault : std::runtime_error {
  explicit EngineFault(const std::string& what) : std::runtime_error(what) {}
};

// Snapshot-able game state. `done` is derived (see is_done) so that the
// state hash can exclude the step counter.
struct GameState {
  int room = 0;
  std::vector<int> inventory;             // object indices, pickup order
  std::vector<Location> object_locations; // per object index
  std::map<std::string, bool> flags;      // "<obj>-open", "<obj>-lit"
  std::int64_t score = 0;
  int steps = 0;
  bool alive = true;
  std::set<int> fired_rewards;            // reward indices

  friend bool operator==(const GameState&, const GameState&) = default;
};

struct Observation {
  std::string text;
  std::int64_t reward_delta = 0;
  bool done = false;
  std::int64_t score = 0;
};

// Every inapplicable or unrecognized action returns exactly this text.
extern const std::string kFailureText;

namespace engine {

std::pair<GameState, Observation> reset(const WorldSpec& world, std::uint64_t seed = 0);

// Executes one action. Throws EngineFault when called on a done state.
std::pair<GameState, Observation> step(const WorldSpec& world, const GameState& state,
                                       const TemplateAction& action);

bool is_done(const WorldSpec& world, const GameState& state);

// True when the player can see: room not dark, or a lit light source in
// inventory or on the floor.
bool can_see(const WorldSpec& world, const GameState& state);

// Full room text (name, description, visible object listing) as produced
// on entry and by "look".
std::string room_observation(const WorldSpec& world, const GameState& state);

// Versioned binary snapshot; restore(snapshot(s)) == s bit-exactly.
std::vector<std::uint8_t> snapshot(const GameState& state);
GameState restore(const std::vector<std::uint8_t>& blob);

// 64-bit digest over all fields except the step counter, so one world
// situation reached at different times maps to one cell.
std::uint64_t state_hash(const GameState& state);

}  // namespace engine
}  // namespace grue
