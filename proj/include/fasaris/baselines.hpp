#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "fasaris/ao.hpp"

namespace fasaris {

enum class BaselineKind { Proposed, Fpa, Eas, RandomPhase, Passive };

const char* baseline_name(BaselineKind kind);
std::optional<BaselineKind> baseline_from_name(const std::string& name);

// Passive-surface element count matching the active budget:
// floor((P1 + M (P_C + P_DC)) / P_C), evaluated in milliwatts with
// P_C = -10 dBm and P_DC = -5 dBm.
int passive_element_count(const ScenarioConfig& cfg);

struct BaselineResult {
    AOState state;
    ConstraintSet constraint_set = ConstraintSet::Active;
    int eas_subsets_evaluated = 0;
};

struct BaselineOptions {
    // EAS screening budget: each subset's (w, E) run is capped at this many
    // outer rounds, then the winner is re-optimized at the full budget.
    int eas_screen_outers = 8;
    // test hook: overrides the 2N-element pool with given positions
    std::optional<Mat2X> eas_pool_override;
};

// fpa: grid frozen, AO over (w, E). eas: exhaustive C(2N, N) subset search
// over a 2N-element lambda/2 UPA. random: fixed random-phase E (budget-fit
// amplitude), AO over (w, positions). passive: M_passive unit-modulus
// elements, AO over (w, positions, phases).
BaselineResult run_baseline(BaselineKind kind, const ScenarioDraw& draw,
                            const ScenarioConfig& cfg, std::uint64_t seed,
                            const BaselineOptions& opts = {});

} // namespace fasaris
