#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fasaris/baselines.hpp"

namespace fasaris {

// One experiment sweep: vary `parameter` over `values`, run the listed
// schemes on paired channel draws (seed = seed_base + trial).
struct SweepSpec {
    std::string parameter = "p0_dbm";  // p0_dbm | aris_x | m_elements |
                                       // n_paths | n_antennas | region_over_lambda
    std::vector<double> values;
    std::vector<BaselineKind> schemes{BaselineKind::Proposed};
    int trials = 20;
    std::uint64_t seed_base = 1;
};

struct ResultRow {
    double parameter_value = 0.0;
    std::string scheme;
    int trial = 0;
    std::uint64_t seed = 0;
    double rate_bits = 0.0;
    int outer_iters = 0;
    double wall_ms = 0.0;
    bool feasible = false;
};

struct SweepSummaryRow {
    double parameter_value = 0.0;
    std::string scheme;
    double mean_rate = 0.0;
    double stderr_rate = 0.0;
    int count = 0;
};

struct SweepResult {
    std::vector<ResultRow> rows;
    std::vector<SweepSummaryRow> summary;
};

// Applies one sweep value to a config copy (and re-validates).
ScenarioConfig apply_parameter(const ScenarioConfig& cfg, const std::string& parameter,
                               double value);

// Dispatches fn(0..count-1) over the worker pool (FAS_ARIS_THREADS caps it).
void parallel_tasks(int count, const std::function<void(int)>& fn);

// Runs the sweep on a worker pool (FAS_ARIS_THREADS caps the width; rows are
// sorted before return so output is order-independent). Per-run failures
// are recorded as feasible=false rows, never aborting the sweep.
SweepResult run_sweep(const SweepSpec& spec, const ScenarioConfig& cfg);

// Sweep spec file: same flat key=value format as the scenario config, keys
// parameter, values (comma list), schemes (comma list), trials, seed_base.
SweepSpec parse_sweep_text(const std::string& text);
SweepSpec load_sweep(const std::string& path);

// ---- CSV ----------------------------------------------------------------

// Header row + one line per ResultRow, 17-significant-digit floats so
// parsing reproduces the rows exactly. `metadata` lines are emitted as
// leading '#' comments (rng id, baseline position choices).
std::string rows_to_csv(const std::vector<ResultRow>& rows,
                        const std::vector<std::string>& metadata = {});
std::vector<ResultRow> rows_from_csv(const std::string& text);

// ---- figures ------------------------------------------------------------

// figure_id in {convergence, p0, aris_x, m, l, n, range}. Writes
// <figure_id>.csv and <figure_id>.svg under out_dir (plus a companion
// trace CSV for the convergence figure). Returns written paths.
std::vector<std::string> emit_figure_data(const std::string& figure_id,
                                          const ScenarioConfig& cfg,
                                          const std::string& out_dir, int trials,
                                          std::uint64_t seed_base);

// Self-contained line plot with mean +- stderr whiskers.
struct PlotSeries {
    std::string label;
    std::vector<double> x, y, yerr;
};
std::string render_line_svg(const std::string& title, const std::string& x_label,
                            const std::string& y_label,
                            const std::vector<PlotSeries>& series);

// ---- selftest -----------------------------------------------------------

struct SelftestCheck {
    std::string name;
    bool pass = false;
    double worst_residual = 0.0;
    std::string detail;
};

struct SelftestReport {
    std::vector<SelftestCheck> checks;
    bool all_pass() const;
};

// Runs every registered derivation oracle (finite differences, curvature
// bounds, surrogate inequalities, SDP tightness, V-matrix identities, QCQP
// comparisons). fd_perturbation is a negative-control hook that corrupts
// the analytic gradient inside the FD check.
SelftestReport selftest(double fd_perturbation = 0.0);

} // namespace fasaris
