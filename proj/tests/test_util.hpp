#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "grue/admissible.hpp"
#include "grue/kg.hpp"

namespace testutil {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string minigrue_path() { return std::string(GRUE_WORLDS_DIR) + "/minigrue.world"; }
inline std::string tinyworld_path() { return std::string(GRUE_WORLDS_DIR) + "/tinyworld.world"; }

inline grue::WorldSpec minigrue() { return grue::load_world_file(minigrue_path()); }
inline grue::WorldSpec tinyworld() { return grue::load_world_file(tinyworld_path()); }

inline std::vector<grue::TemplateAction> script(const grue::WorldSpec& world,
                                                const std::vector<std::string>& lines) {
  std::vector<grue::TemplateAction> out;
  for (const std::string& line : lines) out.push_back(grue::parse(line, world.vocab, world.templates));
  return out;
}

// Engine + knowledge-graph pipeline state after a scripted walkthrough.
struct Playback {
  grue::GameState state;
  grue::Observation obs;
  grue::KnowledgeGraph graph;
};

inline Playback play(const grue::WorldSpec& world, const std::vector<std::string>& lines) {
  Playback p;
  auto [state, obs] = grue::engine::reset(world);
  p.state = std::move(state);
  p.obs = std::move(obs);
  p.graph = grue::kg::update_graph({}, p.obs.text, std::nullopt, world, p.state);
  for (const grue::TemplateAction& action : script(world, lines)) {
    auto [next, o] = grue::engine::step(world, p.state, action);
    p.state = std::move(next);
    p.obs = std::move(o);
    p.graph = grue::kg::update_graph(p.graph, p.obs.text, action, world, p.state);
  }
  return p;
}

// The full walkthrough that finishes minigrue with score 75.
inline const std::vector<std::string>& minigrue_walkthrough() {
  static const std::vector<std::string> lines = {
      "open mailbox", "go north", "take egg",  "take lamp",
      "light lamp",   "go down",  "go east",   "take treasure",
  };
  return lines;
}

}  // namespace testutil
