#include "fasaris/baselines.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fasaris/rng.hpp"

namespace fasaris {

const char* baseline_name(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::Proposed: return "proposed";
        case BaselineKind::Fpa: return "fpa";
        case BaselineKind::Eas: return "eas";
        case BaselineKind::RandomPhase: return "random";
        case BaselineKind::Passive: return "passive";
    }
    return "?";
}

std::optional<BaselineKind> baseline_from_name(const std::string& name) {
    if (name == "proposed") return BaselineKind::Proposed;
    if (name == "fpa") return BaselineKind::Fpa;
    if (name == "eas") return BaselineKind::Eas;
    if (name == "random") return BaselineKind::RandomPhase;
    if (name == "passive") return BaselineKind::Passive;
    return std::nullopt;
}

int passive_element_count(const ScenarioConfig& cfg) {
    const double pc_mw = std::pow(10.0, -10.0 / 10.0);  // -10 dBm
    const double pdc_mw = std::pow(10.0, -5.0 / 10.0);  // -5 dBm
    double p1_mw = cfg.p1_w * 1e3;
    return static_cast<int>(
        std::floor((p1_mw + cfg.m_elements * (pc_mw + pdc_mw)) / pc_mw));
}

namespace {

// all N-element subsets of {0..pool-1}, lexicographic
void for_each_subset(int pool, int pick, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx(pick);
    for (int i = 0; i < pick; ++i) idx[i] = i;
    while (true) {
        fn(idx);
        int i = pick - 1;
        while (i >= 0 && idx[i] == pool - pick + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < pick; ++j) idx[j] = idx[j - 1] + 1;
    }
}

BaselineResult run_eas(const ScenarioDraw& draw, const ScenarioConfig& cfg,
                       std::uint64_t seed, const BaselineOptions& opts) {
    BaselineResult out;
    Mat2X pool = opts.eas_pool_override
                     ? *opts.eas_pool_override
                     : grid_layout(2 * cfg.n_antennas, cfg.wavelength / 2.0);
    if (pool.rows() < cfg.n_antennas)
        throw std::invalid_argument("eas: pool smaller than n_antennas");

    AOOptions ao_opts;
    ao_opts.optimize_positions = false;

    ScenarioConfig screen = cfg;
    screen.max_outer_iters = std::min(opts.eas_screen_outers, cfg.max_outer_iters);

    double best_rate = -1.0;
    Mat2X best_subset;
    for_each_subset(static_cast<int>(pool.rows()), cfg.n_antennas,
                    [&](const std::vector<int>& idx) {
                        ++out.eas_subsets_evaluated;
                        Mat2X t(cfg.n_antennas, 2);
                        for (int i = 0; i < cfg.n_antennas; ++i)
                            t.row(i) = pool.row(idx[i]);
                        AOState st = optimize_from(initialize(draw, screen, seed, &t),
                                                   draw, screen, ao_opts);
                        if (st.solution.rate_bits > best_rate) {
                            best_rate = st.solution.rate_bits;
                            best_subset = t;
                        }
                    });

    // winner gets the full optimization budget
    out.state = optimize_from(initialize(draw, cfg, seed, &best_subset), draw, cfg,
                              ao_opts);
    return out;
}

} // namespace

BaselineResult run_baseline(BaselineKind kind, const ScenarioDraw& draw,
                            const ScenarioConfig& cfg, std::uint64_t seed,
                            const BaselineOptions& opts) {
    BaselineResult out;
    switch (kind) {
        case BaselineKind::Proposed: {
            out.state = optimize(draw, cfg, seed);
            return out;
        }
        case BaselineKind::Fpa: {
            AOOptions o;
            o.optimize_positions = false;
            out.state = optimize(draw, cfg, seed, o);
            return out;
        }
        case BaselineKind::Eas:
            return run_eas(draw, cfg, seed, opts);
        case BaselineKind::RandomPhase: {
            AOState st = initialize(draw, cfg, seed);
            if (cfg.m_elements > 0) {
                // fresh phase stream (tag 2), common amplitude meeting the
                // budget with equality at the equal-power beamformer
                SplitMix64 rng(SplitMix64::derive(seed, 2));
                for (int m = 0; m < cfg.m_elements; ++m)
                    st.solution.e[m] =
                        std::polar(1.0, rng.next_uniform(0.0, 2.0 * std::numbers::pi));
                Channels ch = assemble_channels(draw, st.solution.layout, cfg);
                double p = aris_power(ch, st.solution.w, st.solution.e, cfg.sigma_r_sq);
                st.solution.e *= std::sqrt(cfg.p1_w / p);
                st.solution.rate_bits = achievable_rate(ch, st.solution.w, st.solution.e,
                                                        cfg.sigma_r_sq, cfg.sigma_u_sq);
                st.rate_trace.back() = st.solution.rate_bits;
            }
            AOOptions o;
            o.optimize_reflection = false;
            out.state = optimize_from(std::move(st), draw, cfg, o);
            return out;
        }
        case BaselineKind::Passive: {
            ScenarioConfig pcfg = cfg;
            pcfg.m_elements = passive_element_count(cfg);
            pcfg.validate();
            AOState st = initialize(draw, pcfg, seed);
            for (int m = 0; m < pcfg.m_elements; ++m)
                st.solution.e[m] /= std::abs(st.solution.e[m]);
            {
                Channels ch = assemble_channels(draw, st.solution.layout, pcfg);
                st.solution.rate_bits = achievable_rate(ch, st.solution.w, st.solution.e,
                                                        pcfg.sigma_r_sq, pcfg.sigma_u_sq);
                st.rate_trace.back() = st.solution.rate_bits;
            }
            AOOptions o;
            o.passive_surface = true;
            out.state = optimize_from(std::move(st), draw, pcfg, o);
            out.constraint_set = ConstraintSet::Passive;
            return out;
        }
    }
    throw std::invalid_argument("run_baseline: unknown kind");
}

} // namespace fasaris
