#include "grue/admissible.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace grue {

bool action_is_admissible(const WorldSpec& world, const GameState& state,
                          const TemplateAction& action) {
  const std::uint64_t before = engine::state_hash(state);
  auto [next, obs] = engine::step(world, state, action);
  (void)obs;
  return engine::state_hash(next) != before || next.score != state.score;
}

std::vector<TemplateAction> admissible_actions_serial(const WorldSpec& world,
                                                      const GameState& state) {
  if (engine::is_done(world, state)) return {};
  std::vector<TemplateAction> candidates =
      enumerate_actions(world.templates, oracle_fill_words(world.vocab));
  std::vector<TemplateAction> out;
  for (const TemplateAction& a : candidates)
    if (action_is_admissible(world, state, a)) out.push_back(a);
  return out;  // enumeration order is already canonical
}

std::vector<TemplateAction> admissible_actions(const WorldSpec& world, const GameState& state) {
  if (engine::is_done(world, state)) return {};
  const std::vector<TemplateAction> candidates =
      enumerate_actions(world.templates, oracle_fill_words(world.vocab));
  const int n = static_cast<int>(candidates.size());
  std::vector<std::uint8_t> keep(candidates.size(), 0);

#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < n; ++i) {
    if (action_is_admissible(world, state, candidates[static_cast<std::size_t>(i)]))
      keep[static_cast<std::size_t>(i)] = 1;
  }

  std::vector<TemplateAction> out;
  for (int i = 0; i < n; ++i)
    if (keep[static_cast<std::size_t>(i)]) out.push_back(candidates[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace grue
