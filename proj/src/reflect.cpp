#include "fasaris/reflect.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "fasaris/metrics.hpp"

namespace fasaris {

namespace {
// Slater needs vartheta strictly below 1; the cap stays four orders tighter
// than the 0.999 rank-quality target.
constexpr double kThetaMax = 1.0 - 1e-7;
constexpr double kEpsFloor = 1e-6;
} // namespace

VMatrices build_v_matrices(const Channels& ch, const Eigen::VectorXcd& w,
                           double sigma_r_sq, double sigma_u_sq) {
    const int m = static_cast<int>(ch.h_ru.size());
    VMatrices vm;
    Eigen::VectorXcd hw = ch.h_br * w;                       // M
    Eigen::VectorXcd dh = ch.h_ru.transpose().cwiseProduct(hw);  // diag(h_RU) H w
    std::complex<double> bu = (ch.h_bu * w)(0);

    vm.v = Eigen::MatrixXcd::Zero(m + 1, m + 1);
    vm.v.topLeftCorner(m, m) = dh * dh.adjoint();
    vm.v.topRightCorner(m, 1) = dh * std::conj(bu);
    vm.v.bottomLeftCorner(1, m) = vm.v.topRightCorner(m, 1).adjoint();

    vm.v_bar = Eigen::MatrixXcd::Zero(m + 1, m + 1);
    vm.v_bar.topLeftCorner(m, m) =
        sigma_r_sq *
        ch.h_ru.transpose().cwiseAbs2().cast<std::complex<double>>().asDiagonal();
    vm.v_bar(m, m) = sigma_u_sq;

    vm.v_hat = Eigen::MatrixXcd::Zero(m + 1, m + 1);
    vm.v_hat.topLeftCorner(m, m) =
        (hw.cwiseAbs2().array() + sigma_r_sq).matrix().cast<std::complex<double>>().asDiagonal();

    vm.direct_power = std::norm(bu);
    return vm;
}

Eigen::VectorXcd lift_e(const Eigen::VectorXcd& e) {
    Eigen::VectorXcd et(e.size() + 1);
    et.head(e.size()) = e.conjugate();
    et[e.size()] = 1.0;
    return et;
}

Eigen::MatrixXcd lift_e_matrix(const Eigen::VectorXcd& e) {
    Eigen::VectorXcd et = lift_e(e);
    return et * et.adjoint();
}

TraceConstraint srcr_cut(const Eigen::MatrixXcd& e_tilde_prev, double vartheta) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e_tilde_prev);
    const Eigen::Index d = e_tilde_prev.rows();
    Eigen::VectorXcd u = es.eigenvectors().col(d - 1);
    TraceConstraint tc;
    tc.a = u * u.adjoint() -
           vartheta * Eigen::MatrixXcd::Identity(d, d);
    tc.sense = ConstraintSense::GE;
    tc.rhs = 0.0;
    return tc;
}

double update_vartheta(const Eigen::MatrixXcd& e_tilde_new, double eps) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e_tilde_new, Eigen::EigenvaluesOnly);
    double ratio = es.eigenvalues().maxCoeff() / e_tilde_new.trace().real();
    return std::min(1.0, ratio + eps);
}

double bilinear_majorant(double chi, double varrho, double chi_p, double varrho_p) {
    double c0 = chi_p - varrho_p;
    double s = chi + varrho;
    return 0.25 * s * s - 0.25 * c0 * c0 - 0.5 * c0 * (chi - chi_p - varrho + varrho_p);
}

namespace {

// varrho is substituted out as Tr(Vbar E~): the constraint binding it is
// provably tight at every optimum of the convexified problem, and keeping a
// ~1e-10-scale slack pair degenerates the interior-point Schur system.
struct LiftedLayout {
    int m = 0;       // ARIS elements
    int dim = 0;     // m+1 block + chi + 2x2 Schur
    int i_chi = 0, i_u = 0, i_z = 0;
};

LiftedLayout layout_for(int m) {
    LiftedLayout l;
    l.m = m;
    l.i_chi = m + 1;
    l.i_u = m + 2;
    l.i_z = m + 3;
    l.dim = m + 4;
    return l;
}

Eigen::MatrixXcd embed(const Eigen::MatrixXcd& block, const LiftedLayout& l) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(l.dim, l.dim);
    a.topLeftCorner(l.m + 1, l.m + 1) = block;
    return a;
}

// Problem (36)-style convexified SDP at the expansion point (chi_p, rho_p);
// with_cut toggles the SRCR constraint. The variable is solved in units of
// the current operating point (dscale): the physical entries span ~15 orders
// of magnitude (amplifier gains vs noise powers), which no data-driven
// equilibration can recover.
ConicProblem build_reflect_sdp(const VMatrices& vm, const LiftedLayout& l,
                               const Eigen::VectorXd& dscale, double p1,
                               double chi_p, double rho_p,
                               const Eigen::MatrixXcd& e_tilde_prev, double vartheta,
                               bool with_cut, bool passive) {
    ConicProblem p;
    p.dim = l.dim;

    auto scaled = [&](Eigen::MatrixXcd a) {
        return Eigen::MatrixXcd(dscale.asDiagonal() * a * dscale.asDiagonal());
    };
    auto push = [&](Eigen::MatrixXcd a, ConstraintSense sense, double rhs) {
        p.constraints.push_back({scaled(std::move(a)), sense, rhs});
    };
    auto pin = [&](int i, double value) {
        p.fixed_entries.push_back({i, i, value / (dscale[i] * dscale[i])});
    };

    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(l.dim, l.dim);
    c(l.i_chi, l.i_chi) = 1.0;
    p.objective = scaled(std::move(c));

    // corner of the lifted block pinned to 1; Schur corner pinned to 1
    pin(l.m, 1.0);
    pin(l.i_u, 1.0);
    if (passive)
        for (int m = 0; m < l.m; ++m) pin(m, 1.0);

    // Tr(Vhat E~) <= P1 (active surface only)
    if (!passive) push(embed(vm.v_hat, l), ConstraintSense::LE, p1);

    // Schur links with rho = Tr(Vbar E~) substituted in:
    //   2 Re v = chi + Tr(Vbar E~)
    //   z = Tr(V E~) + dp - c0^2/4 + c0 (chi - Tr(Vbar E~)) / 2
    const double c0 = chi_p - rho_p;
    {
        Eigen::MatrixXcd a = embed(-vm.v_bar, l);
        a(l.i_u, l.i_z) = 1.0;
        a(l.i_z, l.i_u) = 1.0;
        a(l.i_chi, l.i_chi) = -1.0;
        push(std::move(a), ConstraintSense::EQ, 0.0);
    }
    {
        Eigen::MatrixXcd a = embed(-vm.v + 0.5 * c0 * vm.v_bar, l);
        a(l.i_z, l.i_z) = 1.0;
        a(l.i_chi, l.i_chi) = -0.5 * c0;
        push(std::move(a), ConstraintSense::EQ, vm.direct_power - 0.25 * c0 * c0);
    }
    if (with_cut) {
        TraceConstraint cut = srcr_cut(e_tilde_prev, vartheta);
        push(embed(cut.a, l), cut.sense, cut.rhs);
    }
    return p;
}

// expected magnitude of each lifted dimension at the current operating point
Eigen::VectorXd operating_scale(const LiftedLayout& l, const Eigen::MatrixXcd& e_tilde,
                                double chi, double rho) {
    Eigen::VectorXd d = Eigen::VectorXd::Ones(l.dim);
    double beta_sq = 1.0;
    if (l.m > 0)
        beta_sq = std::max(e_tilde.topLeftCorner(l.m, l.m).trace().real() / l.m, 1.0);
    for (int i = 0; i < l.m; ++i) d[i] = std::sqrt(beta_sq);
    d[l.i_chi] = std::sqrt(std::max(chi, 1.0));
    double z0 = 0.25 * (chi + rho) * (chi + rho);
    d[l.i_z] = std::sqrt(std::max(z0, 1.0));
    return d;
}

double lifted_rate(const VMatrices& vm, const Eigen::MatrixXcd& e_tilde) {
    double num = (vm.v.cwiseProduct(e_tilde.conjugate())).sum().real() + vm.direct_power;
    double den = (vm.v_bar.cwiseProduct(e_tilde.conjugate())).sum().real();
    return std::log2(1.0 + std::max(0.0, num) / std::max(den, 1e-300));
}

// The epigraph entries (chi, u, v, z) are scaffolding; everything the
// algorithm needs lives in the lifted block. Rebuild a consistent, exactly
// feasible (block, chi) pair from whatever the solver returned: clip to the
// cone, renormalize the corner, shrink onto the power budget, then recover
// chi as the largest value admitted by the convexified SINR constraint.
// By construction that chi respects weak duality against the solver bound.
struct BlockSalvage {
    bool ok = false;
    Eigen::MatrixXcd block;
    double chi = 0.0;
};

BlockSalvage salvage_block(const Eigen::MatrixXcd& x_unscaled, const VMatrices& vm,
                           const LiftedLayout& l, double p1, double chi_p,
                           double rho_p, const Eigen::MatrixXcd* cut_uu,
                           double vartheta, bool passive) {
    BlockSalvage out;
    Eigen::MatrixXcd b = x_unscaled.topLeftCorner(l.m + 1, l.m + 1);
    b = 0.5 * (b + b.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b);
    b = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
        es.eigenvectors().adjoint();

    double corner = b(l.m, l.m).real();
    if (corner < 1e-12) return out;
    b /= corner;

    if (passive) {
        for (int i = 0; i < l.m; ++i)
            if (std::abs(b(i, i).real() - 1.0) > 1e-4) return out;
    } else {
        double power = (vm.v_hat.cwiseProduct(b.conjugate())).sum().real();
        if (power > p1) {
            double s = std::sqrt(p1 / power);
            Eigen::VectorXd ds = Eigen::VectorXd::Ones(l.m + 1);
            ds.head(l.m).setConstant(s);
            b = ds.asDiagonal() * b * ds.asDiagonal();
        }
    }
    if (cut_uu) {
        double lhs = (cut_uu->cwiseProduct(b.conjugate())).sum().real();
        double tr = b.trace().real();
        if (lhs < vartheta * tr - 1e-6 * tr) return out;
    }

    // largest chi with f(chi, rho; chi_p, rho_p) <= Tr(V b) + dp; the
    // discriminant of the quadratic collapses to T - c0*rho exactly, which
    // avoids the qb^2 - qc cancellation (those agree to ~rho^2)
    double rho = (vm.v_bar.cwiseProduct(b.conjugate())).sum().real();
    double target = (vm.v.cwiseProduct(b.conjugate())).sum().real() + vm.direct_power;
    double c0 = chi_p - rho_p;
    double disc = target - c0 * rho;
    if (disc < 0.0) return out;
    out.chi = std::max(0.0, (c0 - rho) + 2.0 * std::sqrt(disc));
    out.block = std::move(b);
    out.ok = true;
    return out;
}

} // namespace

ReflectResult optimize_reflection(const Channels& ch, const Eigen::VectorXcd& w,
                                  const ScenarioConfig& cfg,
                                  const Eigen::VectorXcd& e_init,
                                  const ReflectOptions& opts) {
    const int m = static_cast<int>(e_init.size());
    ReflectResult out;
    out.e = e_init;
    if (m == 0) return out;

    const LiftedLayout l = layout_for(m);
    VMatrices vm = build_v_matrices(ch, w, cfg.sigma_r_sq, cfg.sigma_u_sq);

    ReflectState st;
    st.v_mat = vm.v;
    st.v_bar = vm.v_bar;
    st.v_hat = vm.v_hat;
    st.direct_power = vm.direct_power;
    st.e_tilde_mat = lift_e_matrix(e_init);
    st.eps = cfg.srcr_eps0;
    st.varrho = cfg.sigma_r_sq * ch.h_ru.cwiseProduct(e_init.transpose()).squaredNorm() +
                cfg.sigma_u_sq;
    st.chi = achieved_sinr(ch, w, e_init, cfg.sigma_r_sq, cfg.sigma_u_sq);

    // Noise measured in units of the operating-point denominator: chi ~ 1e1
    // against rho ~ 1e-10 would otherwise bury the bilinear term chi*rho
    // seven digits below the solver's relative accuracy. The SINR, the rate
    // and the lifted block are invariant to this change of units.
    const double noise0 = st.varrho;
    vm.v /= noise0;
    vm.v_bar /= noise0;
    vm.direct_power /= noise0;
    st.varrho = 1.0;

    double rate = lifted_rate(vm, st.e_tilde_mat);

    Eigen::VectorXd dscale;
    Eigen::MatrixXcd cut_uu;
    // Solve one convexified subproblem and rebuild the lifted block from the
    // result. Accepts when the recovered chi certifies near-optimality
    // against the dual bound, or when the block still improves the lifted
    // rate (ascent is all the fixed-point loop needs).
    auto try_step = [&](bool with_cut) {
        dscale = operating_scale(l, st.e_tilde_mat, st.chi, st.varrho);
        const Eigen::MatrixXcd* cut_ptr = nullptr;
        if (with_cut) {
            TraceConstraint cut = srcr_cut(st.e_tilde_mat, 0.0);
            cut_uu = cut.a;  // u u^H at vartheta = 0
            cut_ptr = &cut_uu;
        }
        ConeSolution sol =
            solve_sdp(build_reflect_sdp(vm, l, dscale, cfg.p1_w, st.chi, st.varrho,
                                        st.e_tilde_mat, st.vartheta, with_cut,
                                        opts.passive));
        if (sol.status == SolveStatus::Infeasible || sol.x.size() == 0) return false;
        Eigen::MatrixXcd x = dscale.asDiagonal() * sol.x * dscale.asDiagonal();
        BlockSalvage salv = salvage_block(x, vm, l, cfg.p1_w, st.chi, st.varrho,
                                          cut_ptr, st.vartheta, opts.passive);
        if (!salv.ok) return false;
        bool certified = !std::isnan(sol.dual_bound) &&
                         salv.chi >= sol.dual_bound - 3e-4 * (1.0 + sol.dual_bound);
        bool improves = lifted_rate(vm, salv.block) >= rate - 1e-12;
        if (!certified && !improves) return false;
        st.e_tilde_mat = std::move(salv.block);
        // re-expand the SCA at the block's own operating point (touching
        // point of the majorant); leaving chi at the recovered value would
        // trail the block and throttle every subsequent step
        st.varrho = (vm.v_bar.cwiseProduct(st.e_tilde_mat.conjugate())).sum().real();
        double num = (vm.v.cwiseProduct(st.e_tilde_mat.conjugate())).sum().real() +
                     vm.direct_power;
        st.chi = std::max(0.0, num / std::max(st.varrho, 1e-300));
        return true;
    };

    // bootstrap: rank-relaxed solve seeds vartheta with its eigen ratio
    if (!try_step(false)) {
        out.stalled = true;
        return out;
    }
    st.vartheta = std::min(update_vartheta(st.e_tilde_mat, 0.0), kThetaMax);
    out.vartheta_trace.push_back(st.vartheta);
    rate = lifted_rate(vm, st.e_tilde_mat);

    int consecutive_failures = 0;
    double prev_gain = -1.0;
    for (int p = 0; p < cfg.max_inner_iters; ++p) {
        out.iterations = p + 1;
        // the cut exists to force rank-one-ness; once the incumbent already
        // exceeds the vartheta cap it can only block genuine progress
        // (at vartheta ~ 1 the feasible rotation per solve is ~sqrt(1e-7))
        bool need_cut =
            update_vartheta(st.e_tilde_mat, 0.0) < kThetaMax;
        if (try_step(need_cut)) {
            st.eps = cfg.srcr_eps0;
            consecutive_failures = 0;
            st.vartheta = std::min(update_vartheta(st.e_tilde_mat, st.eps), kThetaMax);
            out.vartheta_trace.push_back(st.vartheta);
            double new_rate = lifted_rate(vm, st.e_tilde_mat);
            double gain = new_rate - rate;
            rate = new_rate;
            // eps2 is the accuracy of the conditional solve: the SCA tail
            // contracts geometrically, so stop once the projected remaining
            // ascent drops below eps2, not at the first small step (which
            // strands tail mass ~50x eps2 and stalls the outer loop)
            double ratio = prev_gain > 0.0
                               ? std::clamp(gain / prev_gain, 0.0, 0.99)
                               : 0.99;
            prev_gain = gain;
            double projected_tail = gain * ratio / (1.0 - ratio);
            if (gain < cfg.eps2 && projected_tail < cfg.eps2) break;
        } else {
            st.eps = std::max(st.eps / 2.0, kEpsFloor);
            ++consecutive_failures;
            st.vartheta = std::min(update_vartheta(st.e_tilde_mat, st.eps), kThetaMax);
            if (st.eps <= kEpsFloor && consecutive_failures >= 3) {
                out.stalled = true;
                break;
            }
        }
    }

    // rank-one extraction, phase-normalized so the last entry is exactly 1
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(st.e_tilde_mat);
    double lmax = es.eigenvalues().maxCoeff();
    out.rank_quality = lmax / st.e_tilde_mat.trace().real();
    out.chi_final = st.chi;
    out.lifted_rate = rate;
    out.e_tilde_final = st.e_tilde_mat;

    Eigen::VectorXcd et = std::sqrt(std::max(lmax, 0.0)) * es.eigenvectors().col(m);
    std::complex<double> last = et[m];
    if (std::abs(last) < 1e-12) {
        out.stalled = true;
        return out;
    }
    et /= last;

    Eigen::VectorXcd e_new(m);
    for (int i = 0; i < m; ++i) e_new[i] = std::conj(et[i]);
    if (opts.passive) {
        for (int i = 0; i < m; ++i) {
            double a = std::abs(e_new[i]);
            e_new[i] = a > 0.0 ? e_new[i] / a : std::complex<double>(1.0, 0.0);
        }
    } else {
        for (int i = 0; i < m; ++i)
            if (std::abs(e_new[i]) < 1e-9) {
                double ph = std::arg(e_new[i]);
                e_new[i] = std::polar(1e-9, ph);
            }
        double power = aris_power(ch, w, e_new, cfg.sigma_r_sq);
        if (power > cfg.p1_w) e_new *= std::sqrt(cfg.p1_w / power);
    }

    // never hand back a worse point than the input
    double r_new = achievable_rate(ch, w, e_new, cfg.sigma_r_sq, cfg.sigma_u_sq);
    double r_old = achievable_rate(ch, w, e_init, cfg.sigma_r_sq, cfg.sigma_u_sq);
    if (r_new >= r_old) {
        out.e = e_new;
    } else {
        out.e = e_init;
        out.stalled = true;
    }
    return out;
}

} // namespace fasaris
