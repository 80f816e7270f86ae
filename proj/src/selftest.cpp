#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <numbers>

#include "fasaris/beamform.hpp"
#include "fasaris/bench.hpp"
#include "fasaris/positions.hpp"
#include "fasaris/reflect.hpp"
#include "fasaris/rng.hpp"

// Library-side oracle suite: every check recomputes a quantity through an
// independent route (scalar loops, finite differences, dual bounds, dense
// sampling) and reports the worst residual it saw.

namespace fasaris {

namespace {

using cplx = std::complex<double>;

struct Instance {
    ScenarioConfig cfg;
    ScenarioDraw draw;
    AntennaLayout lay;
    Channels ch;
    Eigen::VectorXcd w, e;
    ChannelParts parts;
};

Instance make_instance(std::uint64_t seed) {
    Instance f;
    f.cfg.validate();
    f.draw = sample_scenario(f.cfg, seed);
    f.lay = {initial_fa_grid(f.cfg), aris_layout(f.cfg)};
    f.ch = assemble_channels(f.draw, f.lay, f.cfg);
    SplitMix64 rng(seed * 131 + 7);
    f.e.resize(f.cfg.m_elements);
    for (int i = 0; i < f.cfg.m_elements; ++i)
        f.e[i] = std::polar(1.0, rng.next_uniform(0.0, 2.0 * std::numbers::pi));
    Eigen::VectorXcd w_eq = Eigen::VectorXcd::Ones(f.cfg.n_antennas) *
                            std::sqrt(f.cfg.p0_w / f.cfg.n_antennas);
    double p = aris_power(f.ch, w_eq, f.e, f.cfg.sigma_r_sq);
    f.e *= std::sqrt(0.8 * f.cfg.p1_w / p);
    f.w = optimize_beamforming(f.ch, f.e, f.cfg);
    f.parts = make_channel_parts(f.draw, f.lay.r_bar, f.cfg);
    return f;
}

Eigen::Vector2d random_point(SplitMix64& rng, double half) {
    return {rng.next_uniform(-half, half), rng.next_uniform(-half, half)};
}

SelftestCheck check_dbm() {
    SelftestCheck c{"dbm_conversion", false, 0.0, {}};
    c.worst_residual = std::max({std::abs(convert_dbm(0.0) - 1e-3) / 1e-3,
                                 std::abs(convert_dbm(20.0) - 0.1) / 0.1,
                                 std::abs(convert_dbm(-70.0) - 1e-10) / 1e-10});
    c.pass = c.worst_residual < 1e-12;
    return c;
}

SelftestCheck check_path_loss() {
    SelftestCheck c{"path_loss_reference", false, 0.0, {}};
    ScenarioConfig cfg;
    cfg.validate();
    long double expect = 1e-3L * std::pow((long double)std::sqrt(925.0L), -2.2L);
    c.worst_residual =
        std::max(std::abs(path_loss(1.0, 2.0, cfg) - 1e-3) / 1e-3,
                 std::abs(path_loss(cfg.dist_br(), 2.2, cfg) - (double)expect) /
                     (double)expect);
    c.pass = c.worst_residual < 1e-12;
    return c;
}

SelftestCheck check_draw_variance() {
    SelftestCheck c{"draw_variance_identity", false, 0.0, {}};
    ScenarioConfig cfg;
    cfg.validate();
    const int trials = 40000;
    long double acc = 0.0;
    for (int t = 0; t < trials; ++t)
        acc += sample_scenario(cfg, 50000 + t).sigma_br.squaredNorm();
    double pl = path_loss(cfg.dist_br(), cfg.alpha_br, cfg);
    c.worst_residual = std::abs((double)(acc / trials) - pl) / pl;
    c.pass = c.worst_residual < 0.02;
    c.detail = "total path variance vs link path loss, Monte Carlo";
    return c;
}

SelftestCheck check_field_response() {
    SelftestCheck c{"field_response_scalar_oracle", false, 0.0, {}};
    SplitMix64 rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        double th = rng.next_uniform(0.0, std::numbers::pi);
        double ph = rng.next_uniform(0.0, std::numbers::pi);
        Eigen::VectorXd tv(1), pv(1);
        tv << th;
        pv << ph;
        Eigen::Vector2d pos(rng.next_uniform(-0.5, 0.5), rng.next_uniform(-0.5, 0.5));
        Eigen::VectorXcd v = field_response_tx(pos, tv, pv, 0.25);
        long double rho = (long double)pos[0] * std::sin((long double)th) *
                              std::cos((long double)ph) +
                          (long double)pos[1] * std::cos((long double)th);
        long double phase = 2.0L * std::numbers::pi_v<long double> / 0.25L * rho;
        cplx ref{(double)std::cos(phase), (double)std::sin(phase)};
        c.worst_residual = std::max(c.worst_residual, std::abs(v[0] - ref));
        c.worst_residual =
            std::max(c.worst_residual, std::abs(std::abs(v[0]) - 1.0));
    }
    c.pass = c.worst_residual < 1e-12;
    return c;
}

SelftestCheck check_channel_assembly() {
    SelftestCheck c{"channel_triple_product_oracle", false, 0.0, {}};
    for (std::uint64_t seed : {11, 12}) {
        Instance f = make_instance(seed);
        // naive entrywise product
        for (int mm = 0; mm < f.cfg.m_elements; ++mm)
            for (int n = 0; n < f.cfg.n_antennas; ++n) {
                cplx acc = 0.0;
                for (int s = 0; s < f.cfg.n_paths; ++s) {
                    Eigen::VectorXd th(1), ph(1);
                    th << f.draw.br.theta_r[s];
                    ph << f.draw.br.phi_r[s];
                    cplx fr = field_response_tx(f.lay.r_bar.row(mm).transpose(), th, ph,
                                                f.cfg.wavelength)[0];
                    th << f.draw.br.theta_t[s];
                    ph << f.draw.br.phi_t[s];
                    cplx up = field_response_tx(f.lay.t_bar.row(n).transpose(), th, ph,
                                                f.cfg.wavelength)[0];
                    acc += std::conj(fr) * f.draw.sigma_br[s] * up;
                }
                c.worst_residual =
                    std::max(c.worst_residual, std::abs(f.ch.h_br(mm, n) - acc));
            }
    }
    c.pass = c.worst_residual < 1e-14;
    return c;
}

SelftestCheck check_rate_power_oracle() {
    SelftestCheck c{"rate_power_scalar_oracle", false, 0.0, {}};
    for (std::uint64_t seed : {21, 22, 23}) {
        Instance f = make_instance(seed);
        // scalar-loop recomputation in long double
        const int N = f.cfg.n_antennas, M = f.cfg.m_elements;
        std::complex<long double> sig = 0.0;
        long double den = f.cfg.sigma_u_sq, pw = 0.0;
        for (int n = 0; n < N; ++n) {
            std::complex<long double> eff = f.ch.h_bu[n];
            for (int mm = 0; mm < M; ++mm)
                eff += (std::complex<long double>)f.ch.h_ru[mm] *
                       (std::complex<long double>)f.e[mm] *
                       (std::complex<long double>)f.ch.h_br(mm, n);
            sig += eff * (std::complex<long double>)f.w[n];
        }
        for (int mm = 0; mm < M; ++mm) {
            std::complex<long double> hw = 0.0;
            for (int n = 0; n < N; ++n)
                hw += (std::complex<long double>)f.ch.h_br(mm, n) *
                      (std::complex<long double>)f.w[n];
            den += (long double)f.cfg.sigma_r_sq *
                   std::norm((std::complex<long double>)f.ch.h_ru[mm] *
                             (std::complex<long double>)f.e[mm]);
            pw += std::norm((std::complex<long double>)f.e[mm] * hw) +
                  (long double)f.cfg.sigma_r_sq * std::norm(f.e[mm]);
        }
        double rate_ref = (double)std::log2(1.0L + std::norm(sig) / den);
        double rate = achievable_rate(f.ch, f.w, f.e, f.cfg.sigma_r_sq, f.cfg.sigma_u_sq);
        double power_ref = (double)pw;
        double power = aris_power(f.ch, f.w, f.e, f.cfg.sigma_r_sq);
        c.worst_residual = std::max(
            {c.worst_residual, std::abs(rate - rate_ref) / (1.0 + rate_ref),
             std::abs(power - power_ref) / power_ref});
    }
    c.pass = c.worst_residual < 1e-12;
    return c;
}

SelftestCheck check_beam_sdp() {
    SelftestCheck c{"beam_sdp_dual_bound", false, 0.0, {}};
    for (std::uint64_t seed : {31, 32, 33}) {
        Instance f = make_instance(seed);
        BeamContext ctx = build_beam_context(f.ch, f.e, f.cfg);
        ConeSolution sol = solve_sdp(build_beam_sdp(ctx));
        if (sol.status != SolveStatus::Optimal) {
            c.detail = "solve failed";
            return c;
        }
        // matched filter refit onto the second constraint is feasible, so
        // the SDP optimum must dominate it; the dual bound must cap both
        Eigen::VectorXcd mf = std::sqrt(ctx.p0) * ctx.varpi.adjoint() / ctx.varpi.norm();
        double q = (mf.adjoint() * ctx.b_matrix * mf)(0).real();
        if (q > ctx.p1_effective) mf *= std::sqrt(ctx.p1_effective / q);
        double lower = std::norm((ctx.varpi * mf)(0));
        double viol = std::max(0.0, (lower - sol.objective_value) / lower);
        c.worst_residual = std::max(c.worst_residual, viol);
    }
    c.pass = c.worst_residual < 1e-6;
    return c;
}

SelftestCheck check_rank_one_tightness() {
    SelftestCheck c{"rank_one_reconstruction_tightness", false, 0.0, {}};
    for (std::uint64_t seed : {41, 42, 43, 44, 45}) {
        Instance f = make_instance(seed);
        BeamContext ctx = build_beam_context(f.ch, f.e, f.cfg);
        ConeSolution sol = solve_sdp(build_beam_sdp(ctx));
        if (sol.status != SolveStatus::Optimal) {
            c.detail = "solve failed";
            return c;
        }
        Eigen::VectorXcd w = reconstruct_rank_one(sol.x, ctx.varpi);
        double relaxed = (ctx.varpi * sol.x * ctx.varpi.adjoint())(0).real();
        double tight = std::norm((ctx.varpi * w)(0));
        c.worst_residual =
            std::max(c.worst_residual, std::abs(tight - relaxed) / relaxed);
        double tr_excess = w.squaredNorm() / ctx.p0 - 1.0;
        double b_excess =
            (w.adjoint() * ctx.b_matrix * w)(0).real() / ctx.p1_effective - 1.0;
        c.worst_residual = std::max({c.worst_residual, tr_excess, b_excess});
    }
    c.pass = c.worst_residual < 1e-6;
    return c;
}

SelftestCheck check_qp2d() {
    SelftestCheck c{"qp2d_grid_oracle", false, 0.0, {}};
    SplitMix64 rng(5);
    for (int rep = 0; rep < 3; ++rep) {
        Qp2dProblem q;
        q.h = -(1.0 + rng.next_unit()) * Eigen::Matrix2d::Identity();
        q.b = {rng.next_uniform(-1.0, 1.0), rng.next_uniform(-1.0, 1.0)};
        q.box_lo = {-1.0, -1.0};
        q.box_hi = {1.0, 1.0};
        q.cuts.push_back({{1.0, 1.0}, 0.5});
        Qp2dResult r = solve_qp2d(q);
        if (!r.feasible) {
            c.detail = "infeasible";
            return c;
        }
        double best = -1e300;
        Eigen::Vector2d best_t;
        for (double x = -1.0; x <= 1.0; x += 1e-3)
            for (double y = -1.0; y <= 1.0; y += 1e-3) {
                if (x + y > 0.5) continue;
                Eigen::Vector2d t(x, y);
                double o = 0.5 * t.dot(q.h * t) + q.b.dot(t);
                if (o > best) {
                    best = o;
                    best_t = t;
                }
            }
        c.worst_residual = std::max(c.worst_residual, (r.t - best_t).norm());
    }
    c.pass = c.worst_residual < 2e-3;
    return c;
}

SelftestCheck check_fd_gradient(double perturbation) {
    SelftestCheck c{"fd_gradient", false, 0.0, {}};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Instance f = make_instance(100 + seed);
        SplitMix64 rng(seed);
        PositionContext ctx = build_position_context(
            f.parts, f.w, f.e, f.lay.t_bar, static_cast<int>(seed % 4), f.cfg);
        const double h = 1e-6 * f.cfg.wavelength;
        for (int rep = 0; rep < 5; ++rep) {
            Eigen::Vector2d t = random_point(rng, f.cfg.region_half);
            Eigen::Vector2d g = grad_g(t, ctx);
            g[0] += perturbation * (1.0 + g.norm());  // negative-control hook
            Eigen::Vector2d fd;
            for (int d = 0; d < 2; ++d) {
                Eigen::Vector2d tp = t, tm = t;
                tp[d] += h;
                tm[d] -= h;
                fd[d] = (g_value(tp, ctx) - g_value(tm, ctx)) / (2.0 * h);
            }
            c.worst_residual =
                std::max(c.worst_residual, (g - fd).norm() / std::max(1e-30, fd.norm()));
        }
    }
    c.pass = c.worst_residual < 1e-5;
    return c;
}

SelftestCheck check_fd_hessian() {
    SelftestCheck c{"fd_hessian", false, 0.0, {}};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Instance f = make_instance(200 + seed);
        SplitMix64 rng(seed);
        PositionContext ctx = build_position_context(
            f.parts, f.w, f.e, f.lay.t_bar, static_cast<int>(seed % 4), f.cfg);
        const double h = 1e-6 * f.cfg.wavelength;
        for (int rep = 0; rep < 3; ++rep) {
            Eigen::Vector2d t = random_point(rng, f.cfg.region_half);
            Eigen::Matrix2d hess = hess_g(t, ctx);
            Eigen::Matrix2d fd;
            for (int d = 0; d < 2; ++d) {
                Eigen::Vector2d tp = t, tm = t;
                tp[d] += h;
                tm[d] -= h;
                fd.col(d) = (grad_g(tp, ctx) - grad_g(tm, ctx)) / (2.0 * h);
            }
            c.worst_residual =
                std::max(c.worst_residual, (hess - fd).norm() / std::max(1e-30, fd.norm()));
        }
    }
    c.pass = c.worst_residual < 1e-4;
    return c;
}

SelftestCheck check_kappa() {
    SelftestCheck c{"kappa_curvature_dominance", false, 0.0, {}};
    bool any = false;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Instance f = make_instance(300 + seed);
        SplitMix64 rng(seed);
        PositionContext ctx = build_position_context(
            f.parts, f.w, f.e, f.lay.t_bar, static_cast<int>(seed % 4), f.cfg);
        double kappa = kappa_bound(ctx);
        if (kappa <= 0.0) continue;
        any = true;
        for (int rep = 0; rep < 400; ++rep) {
            Eigen::Vector2d t = random_point(rng, f.cfg.region_half);
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(hess_g(t, ctx));
            c.worst_residual = std::max(
                c.worst_residual, (es.eigenvalues().maxCoeff() - kappa) / kappa);
        }
    }
    c.pass = any && c.worst_residual < 1e-12;
    c.detail = "max (lambda_max(hess) - kappa)/kappa over samples";
    return c;
}

SelftestCheck check_minorant() {
    SelftestCheck c{"mm_minorant_of_g", false, 0.0, {}};
    for (std::uint64_t seed : {51, 52}) {
        Instance f = make_instance(seed);
        SplitMix64 rng(seed);
        PositionContext ctx = build_position_context(f.parts, f.w, f.e, f.lay.t_bar, 1, f.cfg);
        double kappa = std::max(kappa_bound(ctx), 1e-12);
        double gq = g_value(ctx.t_q, ctx);
        Eigen::Vector2d gr = grad_g(ctx.t_q, ctx);
        double scale = 1.0 + std::abs(gq);
        // touching condition
        c.worst_residual = 0.0;
        for (int rep = 0; rep < 400; ++rep) {
            Eigen::Vector2d t = random_point(rng, f.cfg.region_half);
            Eigen::Vector2d d = t - ctx.t_q;
            double minorant = gq + gr.dot(d) - 0.5 * kappa * d.squaredNorm();
            c.worst_residual =
                std::max(c.worst_residual, (minorant - g_value(t, ctx)) / scale);
        }
    }
    c.pass = c.worst_residual < 1e-9;
    return c;
}

SelftestCheck check_power_majorant() {
    SelftestCheck c{"power_surrogate_majorant", false, 0.0, {}};
    for (std::uint64_t seed : {61, 62}) {
        Instance f = make_instance(seed);
        SplitMix64 rng(seed);
        PositionContext ctx = build_position_context(f.parts, f.w, f.e, f.lay.t_bar, 2, f.cfg);
        PowerSurrogate ps = power_surrogate(ctx);
        double scale = 1.0 + std::abs(ps.value_q);
        c.worst_residual = std::max(
            c.worst_residual,
            std::abs(ps.eval(ctx.t_q) - ghat_value(ctx.t_q, ctx)) / scale);
        for (int rep = 0; rep < 400; ++rep) {
            Eigen::Vector2d t = random_point(rng, f.cfg.region_half);
            c.worst_residual = std::max(
                c.worst_residual, (ghat_value(t, ctx) - ps.eval(t)) / scale);
        }
    }
    c.pass = c.worst_residual < 1e-9;
    return c;
}

SelftestCheck check_v_identities() {
    SelftestCheck c{"v_matrix_identities", false, 0.0, {}};
    for (std::uint64_t seed : {71, 72, 73}) {
        Instance f = make_instance(seed);
        VMatrices vm = build_v_matrices(f.ch, f.w, f.cfg.sigma_r_sq, f.cfg.sigma_u_sq);
        Eigen::VectorXcd et = lift_e(f.e);
        Eigen::RowVectorXcd eff =
            f.ch.h_bu + f.ch.h_ru.cwiseProduct(f.e.transpose()) * f.ch.h_br;
        double lhs1 = (et.adjoint() * vm.v * et)(0).real() + vm.direct_power;
        double rhs1 = std::norm((eff * f.w)(0));
        double lhs2 = (et.adjoint() * vm.v_bar * et)(0).real();
        double rhs2 =
            f.cfg.sigma_r_sq * f.ch.h_ru.cwiseProduct(f.e.transpose()).squaredNorm() +
            f.cfg.sigma_u_sq;
        double lhs3 = (et.adjoint() * vm.v_hat * et)(0).real();
        double rhs3 = aris_power(f.ch, f.w, f.e, f.cfg.sigma_r_sq);
        c.worst_residual = std::max({c.worst_residual, std::abs(lhs1 - rhs1) / rhs1,
                                     std::abs(lhs2 - rhs2) / rhs2,
                                     std::abs(lhs3 - rhs3) / rhs3});
    }
    c.pass = c.worst_residual < 1e-10;
    return c;
}

SelftestCheck check_bilinear() {
    SelftestCheck c{"bilinear_majorant_touching", false, 0.0, {}};
    SplitMix64 rng(9);
    for (int rep = 0; rep < 50; ++rep) {
        double cp = rng.next_uniform(0.0, 10.0), rp = rng.next_uniform(0.0, 10.0);
        double touch = std::abs(bilinear_majorant(cp, rp, cp, rp) - cp * rp) /
                       (1.0 + cp * rp);
        c.worst_residual = std::max(c.worst_residual, touch);
        for (int s = 0; s < 40; ++s) {
            double x = rng.next_uniform(0.0, 10.0), y = rng.next_uniform(0.0, 10.0);
            c.worst_residual = std::max(
                c.worst_residual, (x * y - bilinear_majorant(x, y, cp, rp)) / (1.0 + x * y));
        }
    }
    c.pass = c.worst_residual < 1e-9;
    return c;
}

SelftestCheck check_srcr_eigvector() {
    SelftestCheck c{"srcr_power_iteration_oracle", false, 0.0, {}};
    SplitMix64 rng(13);
    for (int rep = 0; rep < 4; ++rep) {
        Eigen::MatrixXcd g(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) g(i, j) = rng.next_cn(1.0);
        Eigen::MatrixXcd psd = g * g.adjoint();
        TraceConstraint cut = srcr_cut(psd, 0.0);
        Eigen::VectorXcd x = Eigen::VectorXcd::Ones(5).normalized();
        for (int it = 0; it < 5000; ++it) x = (psd * x).normalized();
        c.worst_residual =
            std::max(c.worst_residual, (cut.a - x * x.adjoint()).norm());
    }
    c.pass = c.worst_residual < 1e-8;
    return c;
}

SelftestCheck check_distance_cut() {
    SelftestCheck c{"distance_linearization_bound", false, 0.0, {}};
    SplitMix64 rng(17);
    for (int rep = 0; rep < 300; ++rep) {
        Eigen::Vector2d tq = random_point(rng, 0.5), tv = random_point(rng, 0.5);
        if ((tq - tv).norm() < 1e-9) continue;
        Eigen::Vector2d a = (tq - tv).normalized();
        Eigen::Vector2d t = random_point(rng, 0.5);
        double gamma = a.dot(t - tv);
        c.worst_residual = std::max(c.worst_residual, gamma - (t - tv).norm());
        c.worst_residual = std::max(
            c.worst_residual, std::abs(a.dot(tq - tv) - (tq - tv).norm()));
    }
    c.pass = c.worst_residual < 1e-12;
    return c;
}

} // namespace

SelftestReport selftest(double fd_perturbation) {
    SelftestReport rep;
    rep.checks.push_back(check_dbm());
    rep.checks.push_back(check_path_loss());
    rep.checks.push_back(check_draw_variance());
    rep.checks.push_back(check_field_response());
    rep.checks.push_back(check_channel_assembly());
    rep.checks.push_back(check_rate_power_oracle());
    rep.checks.push_back(check_beam_sdp());
    rep.checks.push_back(check_rank_one_tightness());
    rep.checks.push_back(check_qp2d());
    rep.checks.push_back(check_fd_gradient(fd_perturbation));
    rep.checks.push_back(check_fd_hessian());
    rep.checks.push_back(check_kappa());
    rep.checks.push_back(check_minorant());
    rep.checks.push_back(check_power_majorant());
    rep.checks.push_back(check_v_identities());
    rep.checks.push_back(check_bilinear());
    rep.checks.push_back(check_srcr_eigvector());
    rep.checks.push_back(check_distance_cut());
    return rep;
}

} // namespace fasaris
