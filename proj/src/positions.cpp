#include "fasaris/positions.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "fasaris/metrics.hpp"

namespace fasaris {

double PhaseExpansion::value(const Eigen::Vector2d& t) const {
    double acc = constant;
    for (const auto& tm : terms)
        acc += 2.0 * (tm.coef * std::polar(1.0, tm.freq.dot(t))).real();
    return acc;
}

Eigen::Vector2d PhaseExpansion::gradient(const Eigen::Vector2d& t) const {
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (const auto& tm : terms)
        g -= 2.0 * (tm.coef * std::polar(1.0, tm.freq.dot(t))).imag() * tm.freq;
    return g;
}

Eigen::Matrix2d PhaseExpansion::hessian(const Eigen::Vector2d& t) const {
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    for (const auto& tm : terms)
        h -= 2.0 * (tm.coef * std::polar(1.0, tm.freq.dot(t))).real() *
             (tm.freq * tm.freq.transpose());
    return h;
}

namespace {

Eigen::VectorXcd zeta_from_dirs(const Eigen::Vector2d& t, const Eigen::VectorXd& dx,
                                const Eigen::VectorXd& dy, double k) {
    Eigen::VectorXcd z(dx.size());
    for (Eigen::Index s = 0; s < dx.size(); ++s)
        z[s] = std::polar(1.0, k * (dx[s] * t[0] + dy[s] * t[1]));
    return z;
}

} // namespace

ChannelParts make_channel_parts(const ScenarioDraw& draw, const Mat2X& r_bar,
                                const ScenarioConfig& cfg) {
    ChannelParts parts;
    parts.wavelength = cfg.wavelength;
    parts.sigma_br = draw.sigma_br;
    parts.sigma_bu = draw.sigma_bu;
    parts.f_br = response_matrix(r_bar, draw.br.theta_r, draw.br.phi_r, cfg.wavelength);
    if (r_bar.rows() > 0) {
        Eigen::MatrixXcd ups_ru =
            response_matrix(r_bar, draw.ru.theta_t, draw.ru.phi_t, cfg.wavelength);
        parts.h_ru = draw.sigma_ru.transpose() * ups_ru;
    } else {
        parts.h_ru.resize(1, 0);
    }
    auto dirs = [](const Eigen::VectorXd& th, const Eigen::VectorXd& ph,
                   Eigen::VectorXd& ax, Eigen::VectorXd& ay) {
        ax.resize(th.size());
        ay.resize(th.size());
        for (Eigen::Index s = 0; s < th.size(); ++s) {
            ax[s] = std::sin(th[s]) * std::cos(ph[s]);
            ay[s] = std::cos(th[s]);
        }
    };
    dirs(draw.br.theta_t, draw.br.phi_t, parts.br_dir_x, parts.br_dir_y);
    dirs(draw.bu.theta_t, draw.bu.phi_t, parts.bu_dir_x, parts.bu_dir_y);
    return parts;
}

PositionContext build_position_context(const ChannelParts& parts,
                                       const Eigen::VectorXcd& w,
                                       const Eigen::VectorXcd& e,
                                       const Mat2X& t_bar, int n,
                                       const ScenarioConfig& cfg) {
    const int N = static_cast<int>(t_bar.rows());
    const int L = static_cast<int>(parts.sigma_br.size());
    const int Lbu = static_cast<int>(parts.sigma_bu.size());
    const double k = 2.0 * std::numbers::pi / parts.wavelength;

    PositionContext ctx;
    ctx.n = n;
    ctx.t_q = t_bar.row(n).transpose();
    ctx.wavelength = parts.wavelength;
    ctx.br_dir_x = parts.br_dir_x;
    ctx.br_dir_y = parts.br_dir_y;
    ctx.bu_dir_x = parts.bu_dir_x;
    ctx.bu_dir_y = parts.bu_dir_y;
    ctx.w_mat = w * w.adjoint();

    // xi^H = h_RU E F_BR^H Sigma_BR; omega^H = 1^H Sigma_BU
    if (e.size() > 0 && L > 0) {
        Eigen::RowVectorXcd xi_h = parts.h_ru.cwiseProduct(e.transpose()) *
                                   parts.f_br.adjoint() * parts.sigma_br.asDiagonal();
        ctx.xi = xi_h.adjoint();
    } else {
        ctx.xi = Eigen::VectorXcd::Zero(L);
    }
    ctx.omega = parts.sigma_bu.conjugate();

    Eigen::MatrixXcd zeta_br(L, N), zeta_bu(Lbu, N);
    for (int l = 0; l < N; ++l) {
        zeta_br.col(l) =
            zeta_from_dirs(t_bar.row(l).transpose(), parts.br_dir_x, parts.br_dir_y, k);
        zeta_bu.col(l) =
            zeta_from_dirs(t_bar.row(l).transpose(), parts.bu_dir_x, parts.bu_dir_y, k);
    }
    ctx.mu.resize(N);
    for (int l = 0; l < N; ++l)
        ctx.mu[l] = (ctx.xi.adjoint() * zeta_br.col(l))(0) +
                    (ctx.omega.adjoint() * zeta_bu.col(l))(0);

    ctx.alpha_tilde = 0.0;
    for (int l = 0; l < N; ++l)
        if (l != n) ctx.alpha_tilde += ctx.w_mat(n, l) * std::conj(ctx.mu[l]);
    ctx.beta_tilde = 0.0;
    for (int l = 0; l < N; ++l)
        for (int j = 0; j < N; ++j)
            if (l != n && j != n)
                ctx.beta_tilde += (ctx.mu[l] * ctx.w_mat(l, j) * std::conj(ctx.mu[j])).real();

    // power-constraint surrogate chain
    if (e.size() > 0 && L > 0) {
        Eigen::MatrixXcd ef = e.asDiagonal() * parts.f_br.adjoint();  // E F^H
        Eigen::MatrixXcd mid = ef.adjoint() * ef;                     // F E^H E F^H
        ctx.psi =
            parts.sigma_br.conjugate().asDiagonal() * mid * parts.sigma_br.asDiagonal();
        ctx.psi = 0.5 * (ctx.psi + ctx.psi.adjoint()).eval();
    } else {
        ctx.psi = Eigen::MatrixXcd::Zero(L, L);
    }
    const double wnn = std::norm(w[n]);
    ctx.psi_tilde = wnn * ctx.psi;
    ctx.phi_scale = 0.0;
    if (L > 0 && ctx.psi_tilde.norm() > 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ctx.psi_tilde,
                                                           Eigen::EigenvaluesOnly);
        ctx.phi_scale = std::max(0.0, es.eigenvalues().maxCoeff());
    }

    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(L);
    for (int j = 0; j < N; ++j)
        if (j != n) v += w[j] * zeta_br.col(j);
    ctx.tau = v * std::conj(w[n]);
    ctx.c1 = L > 0 ? (v.adjoint() * ctx.psi * v)(0).real() : 0.0;

    if (L > 0) {
        Eigen::VectorXcd zq = zeta_br.col(n);
        Eigen::VectorXcd phi_minus_psi_zq = ctx.phi_scale * zq - ctx.psi_tilde * zq;
        ctx.c2 = ctx.phi_scale * L + (zq.adjoint() * phi_minus_psi_zq)(0).real();
        ctx.eta = ctx.psi * ctx.tau - phi_minus_psi_zq;
    } else {
        ctx.c2 = 0.0;
        ctx.eta = Eigen::VectorXcd::Zero(0);
    }
    ctx.p1_hat = cfg.p1_w - ctx.c1 - ctx.c2 - cfg.sigma_r_sq * e.squaredNorm();

    ctx.omega_outer = ctx.omega * ctx.omega.adjoint();
    ctx.xi_outer = ctx.xi * ctx.xi.adjoint();

    // trigonometric expansion of g
    auto freq_of = [&](double ax, double ay) { return Eigen::Vector2d(k * ax, k * ay); };
    auto add_term = [&](std::complex<double> c, const Eigen::Vector2d& u) {
        if (std::abs(c) > 0.0) ctx.g_exp.terms.push_back({c, u});
    };
    ctx.g_exp.constant = wnn * (ctx.xi.squaredNorm() + ctx.omega.squaredNorm());
    for (int s = 0; s < L; ++s)
        for (int t = s + 1; t < L; ++t)
            add_term(wnn * std::conj(ctx.xi[s]) * ctx.xi[t],
                     freq_of(parts.br_dir_x[s] - parts.br_dir_x[t],
                             parts.br_dir_y[s] - parts.br_dir_y[t]));
    for (int s = 0; s < Lbu; ++s)
        for (int t = s + 1; t < Lbu; ++t)
            add_term(wnn * std::conj(ctx.omega[s]) * ctx.omega[t],
                     freq_of(parts.bu_dir_x[s] - parts.bu_dir_x[t],
                             parts.bu_dir_y[s] - parts.bu_dir_y[t]));
    for (int s = 0; s < L; ++s)
        for (int t = 0; t < Lbu; ++t)
            add_term(wnn * std::conj(ctx.xi[s]) * ctx.omega[t],
                     freq_of(parts.br_dir_x[s] - parts.bu_dir_x[t],
                             parts.br_dir_y[s] - parts.bu_dir_y[t]));
    for (int s = 0; s < L; ++s)
        add_term(ctx.alpha_tilde * std::conj(ctx.xi[s]),
                 freq_of(parts.br_dir_x[s], parts.br_dir_y[s]));
    for (int t = 0; t < Lbu; ++t)
        add_term(ctx.alpha_tilde * std::conj(ctx.omega[t]),
                 freq_of(parts.bu_dir_x[t], parts.bu_dir_y[t]));

    // ghat(t) = 2Re{zeta_BR^H(t) eta} = sum_s 2Re{eta_s e^{-j k rho_s(t)}}
    for (int s = 0; s < static_cast<int>(ctx.eta.size()); ++s)
        if (std::abs(ctx.eta[s]) > 0.0)
            ctx.ghat_exp.terms.push_back(
                {ctx.eta[s], -freq_of(parts.br_dir_x[s], parts.br_dir_y[s])});

    ctx.kappa = kappa_bound(ctx);
    double eta_abs = 0.0;
    for (int s = 0; s < static_cast<int>(ctx.eta.size()); ++s)
        eta_abs += std::abs(ctx.eta[s]);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    ctx.kappa_hat = 16.0 * pi2 / (ctx.wavelength * ctx.wavelength) * eta_abs;
    return ctx;
}

double g_value(const Eigen::Vector2d& t, const PositionContext& ctx) {
    return ctx.g_exp.value(t);
}

double g_value_direct(const Eigen::Vector2d& t, const PositionContext& ctx) {
    const double k = 2.0 * std::numbers::pi / ctx.wavelength;
    Eigen::VectorXcd z_br = zeta_from_dirs(t, ctx.br_dir_x, ctx.br_dir_y, k);
    Eigen::VectorXcd z_bu = zeta_from_dirs(t, ctx.bu_dir_x, ctx.bu_dir_y, k);
    std::complex<double> mu_n =
        (ctx.xi.adjoint() * z_br)(0) + (ctx.omega.adjoint() * z_bu)(0);
    double wnn = ctx.w_mat(ctx.n, ctx.n).real();
    return wnn * std::norm(mu_n) + 2.0 * (ctx.alpha_tilde * mu_n).real();
}

Eigen::Vector2d grad_g(const Eigen::Vector2d& t, const PositionContext& ctx) {
    return ctx.g_exp.gradient(t);
}

Eigen::Matrix2d hess_g(const Eigen::Vector2d& t, const PositionContext& ctx) {
    return ctx.g_exp.hessian(t);
}

double kappa_bound(const PositionContext& ctx) {
    const int L = static_cast<int>(ctx.xi.size());
    const int Lbu = static_cast<int>(ctx.omega.size());
    const double wnn = ctx.w_mat(ctx.n, ctx.n).real();
    double pair_sum = 0.0;
    for (int s = 0; s < Lbu; ++s)
        for (int t = s + 1; t < Lbu; ++t) pair_sum += std::abs(ctx.omega_outer(s, t));
    for (int s = 0; s < L; ++s)
        for (int t = s + 1; t < L; ++t) pair_sum += std::abs(ctx.xi_outer(s, t));
    double cross_sum = 0.0;
    for (int s = 0; s < L; ++s)
        for (int t = 0; t < Lbu; ++t)
            cross_sum += std::abs(ctx.xi[s]) * std::abs(ctx.omega[t]);
    double alpha_sum = 0.0;
    const double a_abs = std::abs(ctx.alpha_tilde);
    for (int s = 0; s < L; ++s) alpha_sum += a_abs * std::abs(ctx.xi[s]);
    for (int t = 0; t < Lbu; ++t) alpha_sum += a_abs * std::abs(ctx.omega[t]);

    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double lam2 = ctx.wavelength * ctx.wavelength;
    return 64.0 * pi2 / lam2 * wnn * (pair_sum + cross_sum) +
           16.0 * pi2 / lam2 * alpha_sum;
}

double ghat_value(const Eigen::Vector2d& t, const PositionContext& ctx) {
    return ctx.ghat_exp.value(t);
}

PowerSurrogate power_surrogate(const PositionContext& ctx) {
    PowerSurrogate s;
    s.t_q = ctx.t_q;
    s.value_q = ctx.ghat_exp.value(ctx.t_q);
    s.grad_q = ctx.ghat_exp.gradient(ctx.t_q);
    s.kappa_hat = ctx.kappa_hat;
    return s;
}

PositionStep update_position(const PositionContext& ctx, const Mat2X& t_bar,
                             const ScenarioConfig& cfg) {
    PositionStep step;
    step.t = ctx.t_q;

    Qp2dProblem qp;
    const double kappa = std::max(ctx.kappa, 1e-12);
    qp.h = -kappa * Eigen::Matrix2d::Identity();
    qp.b = grad_g(ctx.t_q, ctx) + kappa * ctx.t_q;
    qp.box_lo = {-cfg.region_half, -cfg.region_half};
    qp.box_hi = {cfg.region_half, cfg.region_half};

    // linearized distance cuts gamma(t) >= D
    for (Eigen::Index v = 0; v < t_bar.rows(); ++v) {
        if (v == ctx.n) continue;
        Eigen::Vector2d tv = t_bar.row(v).transpose();
        Eigen::Vector2d diff = ctx.t_q - tv;
        double dist = diff.norm();
        if (dist < 1e-14) {
            step.stalled = true;  // coincident antennas: no usable direction
            return step;
        }
        Eigen::Vector2d a = diff / dist;
        qp.cuts.push_back({-a, -(cfg.min_dist + a.dot(tv))});
    }

    // power surrogate: a disc when the quadratic term is present
    PowerSurrogate ps = power_surrogate(ctx);
    double headroom = ctx.p1_hat - ps.value_q;
    if (headroom < -1e-9 * (1.0 + std::abs(ctx.p1_hat))) {
        step.stalled = true;  // current point outside the surrogate budget
        return step;
    }
    if (ps.kappa_hat > 1e-300) {
        Eigen::Vector2d center = ctx.t_q - ps.grad_q / ps.kappa_hat;
        double r2 = 2.0 * std::max(0.0, headroom) / ps.kappa_hat +
                    ps.grad_q.squaredNorm() / (ps.kappa_hat * ps.kappa_hat);
        qp.disc = Disc{center, std::sqrt(r2)};
    } else if (ps.grad_q.norm() > 1e-300) {
        qp.cuts.push_back({ps.grad_q, std::max(0.0, headroom) + ps.grad_q.dot(ctx.t_q)});
    }

    Qp2dResult res = solve_qp2d(qp);
    if (!res.feasible) {
        step.stalled = true;
        return step;
    }

    // MM ascent guarantee; a failed check means numerical slack, keep t_q
    double g_old = g_value(ctx.t_q, ctx);
    double g_new = g_value(res.t, ctx);
    if (g_new < g_old - 1e-9 * (1.0 + std::abs(g_old))) return step;

    step.t = res.t;
    step.moved = (res.t - ctx.t_q).norm() > 0.0;
    return step;
}

PositionResult optimize_positions(const ScenarioDraw& draw, const AntennaLayout& layout,
                                  const Eigen::VectorXcd& w, const Eigen::VectorXcd& e,
                                  const ScenarioConfig& cfg) {
    PositionResult out;
    out.t_bar = layout.t_bar;
    const int N = static_cast<int>(out.t_bar.rows());
    ChannelParts parts = make_channel_parts(draw, layout.r_bar, cfg);

    auto rate_of = [&](const Mat2X& t) {
        Channels ch = assemble_channels(draw, {t, layout.r_bar}, cfg);
        return achievable_rate(ch, w, e, cfg.sigma_r_sq, cfg.sigma_u_sq);
    };
    double rate = rate_of(out.t_bar);

    // One accepted move after the usual numerical-slack re-check.
    auto try_move = [&](int n, const Eigen::Vector2d& t_new) {
        Mat2X trial = out.t_bar;
        trial.row(n) = t_new.transpose();
        for (int v = 0; v < N; ++v)
            if (v != n &&
                (trial.row(n) - trial.row(v)).norm() < cfg.min_dist * (1.0 - 1e-9))
                return false;
        if (e.size() > 0) {
            Channels ch = assemble_channels(draw, {trial, layout.r_bar}, cfg);
            if (aris_power(ch, w, e, cfg.sigma_r_sq) > cfg.p1_w * (1.0 + 1e-9))
                return false;
        }
        out.t_bar = trial;
        return true;
    };

    const double step_tol = 1e-7 * cfg.wavelength;
    for (int sweep = 0; sweep < cfg.max_inner_iters; ++sweep) {
        out.sweeps = sweep + 1;
        for (int n = 0; n < N; ++n) {
            // drive this antenna's MM recursion to its fixed point; the
            // global curvature bound makes single steps short, so one QP
            // per sweep would spread convergence over many outer rounds
            for (int rep = 0; rep < 200; ++rep) {
                PositionContext ctx =
                    build_position_context(parts, w, e, out.t_bar, n, cfg);
                PositionStep step = update_position(ctx, out.t_bar, cfg);
                out.stalled = out.stalled || step.stalled;
                if (!step.moved || (step.t - ctx.t_q).norm() < step_tol) {
                    if (step.moved) try_move(n, step.t);
                    break;
                }
                if (!try_move(n, step.t)) break;
            }
        }
        double new_rate = rate_of(out.t_bar);
        double gain = new_rate - rate;
        rate = new_rate;
        if (gain < cfg.eps1) break;
    }
    return out;
}

} // namespace fasaris
