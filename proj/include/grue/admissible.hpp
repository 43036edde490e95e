#pragma once

#include <vector>

#include "grue/engine.hpp"

namespace grue {

// Brute-force admissible-action oracle: an action is admissible at a state
// when stepping it changes the state hash or the score. Fill candidates are
// the noun/proper-noun/adjective/direction tagged words. Results are in
// canonical order (template id, then fill ids). A done state has no
// admissible actions.
//
// admissible_actions fans the simulations out across OpenMP threads and is
// the production path; admissible_actions_serial is the reference kept for
// testing and benchmarking. Both return identical vectors.
std::vector<TemplateAction> admissible_actions(const WorldSpec& world, const GameState& state);
std::vector<TemplateAction> admissible_actions_serial(const WorldSpec& world, const GameState& state);

// Shared predicate: does stepping `action` change state hash or score?
bool action_is_admissible(const WorldSpec& world, const GameState& state,
                          const TemplateAction& action);

}  // namespace grue
