#pragma once

#include <cstdint>
#include <vector>

#include "fasaris/metrics.hpp"

namespace fasaris {

struct AOState {
    Solution solution;
    int iter = 0;
    std::vector<double> rate_trace;  // per-outer-iteration rates
    bool beam_stalled = false;
    bool position_stalled = false;
    bool reflect_stalled = false;
    std::vector<double> wall_time_ms;  // per-outer-iteration timings
    bool converged = false;
};

// Starting point: lambda/2 grid positions centered in S_t, random ARIS
// phases with a common amplitude filling 90% of the P1 budget at the
// equal-power beamformer. Deterministic in (draw.seed-independent) seed.
// t_override replaces the grid (EAS subset evaluation).
AOState initialize(const ScenarioDraw& draw, const ScenarioConfig& cfg,
                   std::uint64_t seed,
                   const Mat2X* t_override = nullptr);

struct AOOptions {
    bool optimize_positions = true;  // FPA baselines freeze the grid
    bool optimize_reflection = true; // identity step on E when false
    bool passive_surface = false;    // unit-modulus pins in the reflect step
};

// Alternating loop w -> t_bar -> E until the outer rate gain drops below
// eps3 or the iteration cap. Every sub-step that would lower the rate is
// reverted (identity step), so the trace is non-decreasing.
AOState optimize(const ScenarioDraw& draw, const ScenarioConfig& cfg,
                 std::uint64_t seed, const AOOptions& opts = {});

// Variant for a caller-supplied starting point (EAS subset evaluation).
AOState optimize_from(AOState state, const ScenarioDraw& draw,
                      const ScenarioConfig& cfg, const AOOptions& opts = {});

} // namespace fasaris
