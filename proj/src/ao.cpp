#include "fasaris/ao.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fasaris/beamform.hpp"
#include "fasaris/positions.hpp"
#include "fasaris/reflect.hpp"
#include "fasaris/rng.hpp"

namespace fasaris {

namespace {

double rate_of(const Solution& sol, const ScenarioDraw& draw, const ScenarioConfig& cfg) {
    Channels ch = assemble_channels(draw, sol.layout, cfg);
    return achievable_rate(ch, sol.w, sol.e, cfg.sigma_r_sq, cfg.sigma_u_sq);
}

} // namespace

AOState initialize(const ScenarioDraw& draw, const ScenarioConfig& cfg,
                   std::uint64_t seed, const Mat2X* t_override) {
    AOState st;
    st.solution.layout.t_bar = t_override ? *t_override : initial_fa_grid(cfg);
    st.solution.layout.r_bar = aris_layout(cfg);

    const int n = cfg.n_antennas;
    const int m = cfg.m_elements;
    Eigen::VectorXcd w_eq =
        Eigen::VectorXcd::Ones(n) * std::sqrt(cfg.p0_w / n);
    st.solution.w = w_eq;

    st.solution.e.resize(m);
    if (m > 0) {
        SplitMix64 rng(SplitMix64::derive(seed, 1));
        for (int i = 0; i < m; ++i)
            st.solution.e[i] =
                std::polar(1.0, rng.next_uniform(0.0, 2.0 * std::numbers::pi));
        // common amplitude: aris_power is beta^2 (||H w||^2 + sigma_r^2 M)
        Channels ch = assemble_channels(draw, st.solution.layout, cfg);
        double unit_power = aris_power(ch, w_eq, st.solution.e, cfg.sigma_r_sq);
        if (!(unit_power > 0.0))
            throw std::runtime_error("initialize: degenerate ARIS power");
        st.solution.e *= std::sqrt(0.9 * cfg.p1_w / unit_power);
    }

    st.solution.rate_bits = rate_of(st.solution, draw, cfg);
    st.rate_trace.push_back(st.solution.rate_bits);
    return st;
}

AOState optimize_from(AOState st, const ScenarioDraw& draw,
                      const ScenarioConfig& cfg, const AOOptions& opts) {
    using clock = std::chrono::steady_clock;
    double rate = st.solution.rate_bits;

    // a sub-step is kept only if it does not lower the rate; solver hiccups
    // degrade to identity steps instead of breaking monotonicity
    auto guarded = [&](Solution cand, bool& stall_flag) {
        double r = rate_of(cand, draw, cfg);
        if (r >= rate) {
            st.solution = std::move(cand);
            st.solution.rate_bits = r;
            rate = r;
        } else {
            stall_flag = true;
        }
    };

    for (int outer = 0; outer < cfg.max_outer_iters; ++outer) {
        auto t0 = clock::now();
        st.iter = outer + 1;

        {
            Channels ch = assemble_channels(draw, st.solution.layout, cfg);
            Solution cand = st.solution;
            try {
                cand.w = optimize_beamforming(ch, st.solution.e, cfg);
                guarded(std::move(cand), st.beam_stalled);
            } catch (const std::exception&) {
                st.beam_stalled = true;
            }
        }

        if (opts.optimize_positions) {
            PositionResult pr = optimize_positions(draw, st.solution.layout,
                                                   st.solution.w, st.solution.e, cfg);
            Solution cand = st.solution;
            cand.layout.t_bar = pr.t_bar;
            guarded(std::move(cand), st.position_stalled);
        }

        if (opts.optimize_reflection && cfg.m_elements > 0) {
            Channels ch = assemble_channels(draw, st.solution.layout, cfg);
            ReflectOptions ropts;
            ropts.passive = opts.passive_surface;
            ReflectResult rr =
                optimize_reflection(ch, st.solution.w, cfg, st.solution.e, ropts);
            st.reflect_stalled = st.reflect_stalled || rr.stalled;
            Solution cand = st.solution;
            cand.e = rr.e;
            guarded(std::move(cand), st.reflect_stalled);
        }

        st.wall_time_ms.push_back(
            std::chrono::duration<double, std::milli>(clock::now() - t0).count());

        double gain = rate - st.rate_trace.back();
        st.rate_trace.push_back(rate);
        if (gain < cfg.eps3) {
            st.converged = true;
            break;
        }
    }
    st.solution.rate_bits = rate;
    st.solution.trace = st.rate_trace;
    return st;
}

AOState optimize(const ScenarioDraw& draw, const ScenarioConfig& cfg,
                 std::uint64_t seed, const AOOptions& opts) {
    return optimize_from(initialize(draw, cfg, seed), draw, cfg, opts);
}

} // namespace fasaris
