// Benchmark comparing the serial admissible-action oracle against the
// OpenMP-parallel kernel on identical states. Both must return identical
// canonical sets; the table reports per-call time and speedup.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "grue/admissible.hpp"
#include "grue/kg.hpp"

using namespace grue;

namespace {

double bench(const WorldSpec& world, const GameState& state, int iters, bool parallel) {
  auto t0 = std::chrono::steady_clock::now();
  std::size_t sink = 0;
  for (int i = 0; i < iters; ++i) {
    auto set = parallel ? admissible_actions(world, state) : admissible_actions_serial(world, state);
    sink += set.size();
  }
  double total = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  (void)sink;
  return total / iters;
}

}  // namespace

int main(int argc, char** argv) {
  std::string world_path = argc > 1 ? argv[1] : "worlds/minigrue.world";
  int iters = argc > 2 ? std::atoi(argv[2]) : 50;

  WorldSpec world;
  try {
    world = load_world_file(world_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cannot load %s: %s\n", world_path.c_str(), e.what());
    return 1;
  }

  // A spread of states along a scripted path plus the start state.
  std::vector<std::pair<std::string, GameState>> states;
  auto [state, obs] = engine::reset(world);
  (void)obs;
  states.emplace_back("reset", state);
  const char* script[] = {"open mailbox", "go north", "take egg", "take lamp", "light lamp"};
  for (const char* text : script) {
    TemplateAction action;
    try {
      action = parse(text, world.vocab, world.templates);
    } catch (const ParseError&) {
      break;  // benchmark world without the minigrue script
    }
    auto [next, o] = engine::step(world, state, action);
    (void)o;
    state = std::move(next);
    states.emplace_back(text, state);
  }

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  const std::size_t enum_size =
      enumerate_actions(world.templates, oracle_fill_words(world.vocab)).size();
  std::printf("world=%s candidates=%zu iters=%d threads=%d\n", world_path.c_str(), enum_size,
              iters, threads);
  std::printf("%-14s %10s %12s %12s %8s %6s\n", "state", "admissible", "serial(ms)", "openmp(ms)",
              "speedup", "match");

  for (const auto& [name, s] : states) {
    auto serial_set = admissible_actions_serial(world, s);
    auto parallel_set = admissible_actions(world, s);
    bool match = serial_set == parallel_set;
    double ts = bench(world, s, iters, false);
    double tp = bench(world, s, iters, true);
    std::printf("%-14s %10zu %12.3f %12.3f %8.2f %6s\n", name.c_str(), serial_set.size(), ts, tp,
                ts / tp, match ? "yes" : "NO");
    if (!match) return 1;
  }
  return 0;
}
