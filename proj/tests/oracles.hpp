#pragma once

// Independent test oracles. Everything here recomputes results through a
// different route than the library (scalar loops in extended precision,
// dual bisection, dense grids) so the two sides can disagree.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "fasaris/channel.hpp"
#include "fasaris/conic.hpp"
#include "fasaris/scenario.hpp"

namespace oracles {

using cplxl = std::complex<long double>;

// Field response entry recomputed with long-double scalar arithmetic.
inline cplxl field_entry(double x, double y, double theta, double phi, double lambda) {
    long double rho = static_cast<long double>(x) * std::sin((long double)theta) *
                          std::cos((long double)phi) +
                      static_cast<long double>(y) * std::cos((long double)theta);
    long double ph = 2.0L * std::numbers::pi_v<long double> / (long double)lambda * rho;
    return {std::cos(ph), std::sin(ph)};
}

// Naive triple-product channel assembly, entry by entry.
struct NaiveChannels {
    std::vector<std::vector<cplxl>> h_br;  // M x N
    std::vector<cplxl> h_ru;               // M
    std::vector<cplxl> h_bu;               // N
};

inline NaiveChannels assemble_naive(const fasaris::ScenarioDraw& d,
                                    const fasaris::AntennaLayout& lay,
                                    const fasaris::ScenarioConfig& cfg) {
    const int L = static_cast<int>(d.sigma_bu.size());
    const int N = static_cast<int>(lay.t_bar.rows());
    const int M = static_cast<int>(lay.r_bar.rows());
    NaiveChannels nc;
    nc.h_bu.assign(N, {});
    for (int n = 0; n < N; ++n)
        for (int s = 0; s < L; ++s)
            nc.h_bu[n] += cplxl(d.sigma_bu[s]) *
                          field_entry(lay.t_bar(n, 0), lay.t_bar(n, 1),
                                      d.bu.theta_t[s], d.bu.phi_t[s], cfg.wavelength);
    nc.h_ru.assign(M, {});
    nc.h_br.assign(M, std::vector<cplxl>(N));
    for (int m = 0; m < M; ++m) {
        for (int s = 0; s < L; ++s)
            nc.h_ru[m] += cplxl(d.sigma_ru[s]) *
                          field_entry(lay.r_bar(m, 0), lay.r_bar(m, 1),
                                      d.ru.theta_t[s], d.ru.phi_t[s], cfg.wavelength);
        for (int n = 0; n < N; ++n) {
            cplxl acc = 0;
            for (int s = 0; s < L; ++s) {
                cplxl f = field_entry(lay.r_bar(m, 0), lay.r_bar(m, 1),
                                      d.br.theta_r[s], d.br.phi_r[s], cfg.wavelength);
                cplxl u = field_entry(lay.t_bar(n, 0), lay.t_bar(n, 1),
                                      d.br.theta_t[s], d.br.phi_t[s], cfg.wavelength);
                acc += std::conj(f) * cplxl(d.sigma_br[s]) * u;
            }
            nc.h_br[m][n] = acc;
        }
    }
    return nc;
}

// Rate recomputed with scalar loops in long double.
inline long double naive_rate(const fasaris::Channels& ch, const Eigen::VectorXcd& w,
                              const Eigen::VectorXcd& e, double s_r, double s_u) {
    const int N = static_cast<int>(w.size());
    const int M = static_cast<int>(e.size());
    std::vector<cplxl> eff(N);
    for (int n = 0; n < N; ++n) {
        cplxl acc = cplxl(ch.h_bu[n]);
        for (int m = 0; m < M; ++m)
            acc += cplxl(ch.h_ru[m]) * cplxl(e[m]) * cplxl(ch.h_br(m, n));
        eff[n] = acc;
    }
    cplxl sig = 0;
    for (int n = 0; n < N; ++n) sig += eff[n] * cplxl(w[n]);
    long double den = s_u;
    for (int m = 0; m < M; ++m) den += (long double)s_r * std::norm(cplxl(ch.h_ru[m]) * cplxl(e[m]));
    return std::log2(1.0L + std::norm(sig) / den);
}

inline long double naive_aris_power(const fasaris::Channels& ch, const Eigen::VectorXcd& w,
                                    const Eigen::VectorXcd& e, double s_r) {
    const int N = static_cast<int>(w.size());
    const int M = static_cast<int>(e.size());
    long double acc = 0;
    for (int m = 0; m < M; ++m) {
        cplxl hw = 0;
        for (int n = 0; n < N; ++n) hw += cplxl(ch.h_br(m, n)) * cplxl(w[n]);
        acc += std::norm(cplxl(e[m]) * hw);
        acc += (long double)s_r * std::norm(cplxl(e[m]));
    }
    return acc;
}

// Two-constraint QCQP oracle for the beamforming relaxation:
//   maximize |varpi w|^2  s.t. ||w||^2 <= p0, w^H B w <= p1.
// KKT enumeration with dual bisection on the both-active branch.
struct QcqpResult {
    double objective = 0.0;
    Eigen::VectorXcd w;
    double dual_bound = 0.0;
};

inline QcqpResult qcqp_two_constraint(const Eigen::RowVectorXcd& varpi,
                                      const Eigen::MatrixXcd& bmat, double p0,
                                      double p1) {
    const int n = static_cast<int>(varpi.size());
    QcqpResult best;
    best.w = Eigen::VectorXcd::Zero(n);
    if (varpi.norm() == 0.0) return best;

    auto obj = [&](const Eigen::VectorXcd& w) { return std::norm((varpi * w)(0)); };
    auto bquad = [&](const Eigen::VectorXcd& w) {
        return (w.adjoint() * bmat * w)(0).real();
    };
    auto consider = [&](const Eigen::VectorXcd& w) {
        if (w.squaredNorm() <= p0 * (1.0 + 1e-9) && bquad(w) <= p1 * (1.0 + 1e-9)) {
            double o = obj(w);
            if (o > best.objective) {
                best.objective = o;
                best.w = w;
            }
        }
    };

    // constraint 1 active alone: matched filter
    Eigen::VectorXcd w1 = std::sqrt(p0) * varpi.adjoint() / varpi.norm();
    consider(w1);

    // constraint 2 active alone (only valid if varpi^H lies in range(B))
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bmat);
    Eigen::VectorXd ev = es.eigenvalues();
    double bmax = ev.size() ? std::max(0.0, ev.maxCoeff()) : 0.0;
    if (bmax > 0.0) {
        Eigen::VectorXcd vb = Eigen::VectorXcd::Zero(n);
        bool in_range = true;
        Eigen::VectorXcd proj = es.eigenvectors().adjoint() * varpi.adjoint();
        for (int i = 0; i < n; ++i) {
            if (ev[i] > 1e-12 * bmax)
                vb += (proj[i] / ev[i]) * es.eigenvectors().col(i);
            else if (std::abs(proj[i]) > 1e-8 * varpi.norm())
                in_range = false;
        }
        if (in_range && bquad(vb) > 0.0) {
            Eigen::VectorXcd w2 = std::sqrt(p1 / bquad(vb)) * vb;
            consider(w2);
        }

        // both active: w(nu) ~ (I + nu B)^{-1} varpi^H scaled to ||w||^2 = p0;
        // w^H B w is monotone decreasing in nu
        auto w_of = [&](double nu) {
            Eigen::MatrixXcd m =
                Eigen::MatrixXcd::Identity(n, n) + nu * bmat;
            Eigen::VectorXcd u = m.ldlt().solve(varpi.adjoint());
            return Eigen::VectorXcd(std::sqrt(p0) * u / u.norm());
        };
        double lo = 0.0, hi = 1.0 / bmax;
        if (bquad(w_of(lo)) > p1) {
            while (bquad(w_of(hi)) > p1 && hi < 1e30 / bmax) hi *= 4.0;
            for (int it = 0; it < 300; ++it) {
                double mid = 0.5 * (lo + hi);
                (bquad(w_of(mid)) > p1 ? lo : hi) = mid;
            }
            consider(w_of(hi));
        }
    }

    // weak-duality certificate from the winner's KKT system
    if (best.objective > 0.0) {
        Eigen::VectorXcd g = varpi.adjoint() * (varpi * best.w)(0);  // gradient/1
        Eigen::VectorXcd a1 = best.w, a2 = bmat * best.w;
        Eigen::MatrixXcd at(n, 2);
        at.col(0) = a1;
        at.col(1) = a2;
        Eigen::Vector2cd lam = at.colPivHouseholderQr().solve(g);
        double l1 = std::max(0.0, lam[0].real()), l2 = std::max(0.0, lam[1].real());
        best.dual_bound = l1 * p0 + l2 * p1;
    }
    return best;
}

// Dense grid search for the 2-D QP, step `step` over the feasible region.
inline std::optional<Eigen::Vector2d> qp2d_grid(const fasaris::Qp2dProblem& q,
                                                double step) {
    std::optional<Eigen::Vector2d> best;
    double best_obj = -1e300;
    for (double x = q.box_lo[0]; x <= q.box_hi[0] + 1e-15; x += step)
        for (double y = q.box_lo[1]; y <= q.box_hi[1] + 1e-15; y += step) {
            Eigen::Vector2d t(x, y);
            bool ok = true;
            for (const auto& hp : q.cuts)
                if (hp.a.dot(t) > hp.c + 1e-12) { ok = false; break; }
            if (ok && q.disc && (t - q.disc->center).norm() > q.disc->radius + 1e-12)
                ok = false;
            if (!ok) continue;
            double o = 0.5 * t.dot(q.h * t) + q.b.dot(t);
            if (o > best_obj) {
                best_obj = o;
                best = t;
            }
        }
    return best;
}

} // namespace oracles
