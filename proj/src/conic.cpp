#include "fasaris/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fasaris {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

constexpr int kMaxDim = 192;
constexpr int kMaxIter = 100;

struct Constraint {
    MatrixXcd a;
    double rhs = 0.0;
    // selector-style constraints (<= 4 nonzeros) skip the dense products
    bool sparse = false;
    std::vector<std::pair<std::pair<int, int>, cplx>> nnz;
};

Constraint make_constraint(MatrixXcd a, double rhs) {
    Constraint c;
    c.a = std::move(a);
    c.rhs = rhs;
    return c;
}

void require_hermitian(const MatrixXcd& m, const char* what) {
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument(std::string(what) + ": matrix not Hermitian");
}

void detect_sparsity(Constraint& c) {
    c.nnz.clear();
    for (int i = 0; i < c.a.rows(); ++i)
        for (int j = 0; j < c.a.cols(); ++j)
            if (std::abs(c.a(i, j)) > 0.0) {
                c.nnz.push_back({{i, j}, c.a(i, j)});
                if (c.nnz.size() > 4) {
                    c.sparse = false;
                    c.nnz.clear();
                    return;
                }
            }
    c.sparse = true;
}

double re_inner(const MatrixXcd& a, const MatrixXcd& b) {
    return a.cwiseProduct(b.conjugate()).sum().real();
}

// Re Tr(A S) for Hermitian A, S; equals the real inner product <A, S>.
double re_trace_prod(const Constraint& c, const MatrixXcd& s) {
    if (c.sparse) {
        cplx acc = 0.0;
        for (const auto& [ij, v] : c.nnz) acc += v * s(ij.second, ij.first);
        return acc.real();
    }
    // Tr(A S) = sum_ij A_ij S_ji = <A, S^H> elementwise; S Hermitian
    return re_inner(c.a, s);
}

// Largest alpha with S + alpha*dS >= 0 given the Cholesky factor of S.
double step_to_boundary(const Eigen::LLT<MatrixXcd>& llt, const MatrixXcd& ds) {
    MatrixXcd w = llt.matrixL().solve(ds);
    w = llt.matrixL().solve(w.adjoint()).adjoint();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(w, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-13) return 1e30;
    return -1.0 / lmin;
}

struct IpmResult {
    MatrixXcd x;
    VectorXd y;
    double pobj = 0.0, dobj = 0.0;
    double relgap = 1.0, relpres = 1.0, reldres = 1.0;
    int iterations = 0;
    bool converged = false;
};

// maximize Re<C,X> s.t. Re<A_k,X> = b_k, X >= 0 (all equalities; slacks are
// already embedded by the caller).
IpmResult ipm_solve(const MatrixXcd& c, const std::vector<Constraint>& cons,
                    double tol) {
    const int n = static_cast<int>(c.rows());
    const int m = static_cast<int>(cons.size());

    VectorXd b(m);
    for (int k = 0; k < m; ++k) b[k] = cons[k].rhs;

    double max_ratio = 0.0, max_anorm = 0.0;
    for (const auto& ck : cons) {
        double an = ck.a.norm();
        max_anorm = std::max(max_anorm, an);
        max_ratio = std::max(max_ratio, (1.0 + std::abs(ck.rhs)) / (1.0 + an));
    }
    double rho_x = std::max({10.0, std::sqrt(double(n)), double(n) * max_ratio});
    double rho_z = std::max({10.0, std::sqrt(double(n)), c.norm(), max_anorm});

    MatrixXcd x = rho_x * MatrixXcd::Identity(n, n);
    MatrixXcd z = rho_z * MatrixXcd::Identity(n, n);
    VectorXd y = VectorXd::Zero(m);

    const double bnorm = 1.0 + b.norm();
    const double cnorm = 1.0 + c.norm();

    IpmResult res;
    res.x = x;
    res.y = y;
    double best_err = 1e300;

    std::vector<int> dense_ids;
    for (int k = 0; k < m; ++k)
        if (!cons[k].sparse) dense_ids.push_back(k);

    for (int iter = 0; iter < kMaxIter; ++iter) {
        double mu = re_inner(x, z) / n;

        VectorXd rp(m);
        for (int k = 0; k < m; ++k) rp[k] = b[k] - re_trace_prod(cons[k], x);
        MatrixXcd rd = -c - z;
        for (int k = 0; k < m; ++k) rd += y[k] * cons[k].a;

        double pobj = re_inner(c, x);
        double dobj = b.dot(y);
        double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        double relpres = rp.norm() / bnorm;
        double reldres = rd.norm() / cnorm;

        double err = std::max({relgap, relpres, reldres});
        if (err < best_err) {
            best_err = err;
            res.x = x;
            res.y = y;
            res.pobj = pobj;
            res.dobj = dobj;
            res.relgap = relgap;
            res.relpres = relpres;
            res.reldres = reldres;
        }
        res.iterations = iter;
        if (relgap < tol && relpres < tol && reldres < tol) {
            res.converged = true;
            return res;
        }
        // stall detection: mu collapsed but residuals are stuck
        if (mu < 1e-14 * rho_x * rho_z && err > 100.0 * tol && iter > 10) break;

        Eigen::LLT<MatrixXcd> llt_z(z);
        Eigen::LLT<MatrixXcd> llt_x(x);
        if (llt_z.info() != Eigen::Success || llt_x.info() != Eigen::Success) break;
        MatrixXcd zinv = llt_z.solve(MatrixXcd::Identity(n, n));
        zinv = 0.5 * (zinv + zinv.adjoint()).eval();

        // Schur complement M_kl = Re Tr(A_k X A_l Z^{-1}); its real part is
        // symmetric. Dense rows come from V_k = Z^{-1} A_k X.
        MatrixXd schur = MatrixXd::Zero(m, m);
        std::vector<MatrixXcd> vk(dense_ids.size());
        for (std::size_t di = 0; di < dense_ids.size(); ++di) {
            int k = dense_ids[di];
            vk[di] = zinv * cons[k].a * x;
            for (int l = 0; l < m; ++l) {
                double val;
                if (cons[l].sparse) {
                    cplx acc = 0.0;
                    for (const auto& [ij, v] : cons[l].nnz)
                        acc += v * vk[di](ij.second, ij.first);
                    val = acc.real();
                } else {
                    val = vk[di].cwiseProduct(cons[l].a.conjugate()).sum().real();
                }
                schur(k, l) = val;
                schur(l, k) = val;
            }
        }
        for (int k = 0; k < m; ++k) {
            if (!cons[k].sparse) continue;
            for (int l = 0; l <= k; ++l) {
                if (!cons[l].sparse) continue;
                cplx acc = 0.0;
                for (const auto& [ik, vkz] : cons[k].nnz)
                    for (const auto& [il, vlz] : cons[l].nnz)
                        acc += vkz * vlz * zinv(il.second, ik.first) * x(ik.second, il.first);
                schur(k, l) = acc.real();
                schur(l, k) = acc.real();
            }
        }
        // Jacobi-prescaled long-double factorization with iterative
        // refinement: rows of M blow up like 1/mu near degenerate faces and
        // become nearly parallel, which plain double LDLT cannot separate
        using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
        using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
        VectorXd jac(m);
        for (int k = 0; k < m; ++k)
            jac[k] = 1.0 / std::sqrt(std::max(schur(k, k), 1e-300));
        MatrixXld schur_l = (jac.asDiagonal() * schur * jac.asDiagonal()).cast<long double>();
        schur_l.diagonal().array() += 1e-15L;
        Eigen::LDLT<MatrixXld> schur_f(schur_l);
        if (schur_f.info() != Eigen::Success) break;
        auto schur_solve = [&](const VectorXd& rhs) {
            VectorXld rhs_l = (jac.asDiagonal() * rhs).cast<long double>();
            VectorXld dy_l = schur_f.solve(rhs_l);
            for (int refine = 0; refine < 2; ++refine)
                dy_l += schur_f.solve(rhs_l - schur_l * dy_l);
            return VectorXd(jac.asDiagonal() * dy_l.cast<double>());
        };

        auto solve_direction = [&](double sigma_mu, const MatrixXcd* corr,
                                   MatrixXcd& dx, VectorXd& dy, MatrixXcd& dz) {
            VectorXd rhs(m);
            MatrixXcd xrdzi = x * rd * zinv;
            MatrixXcd corr_zi;
            if (corr) corr_zi = (*corr) * zinv;
            for (int k = 0; k < m; ++k) {
                double v = sigma_mu * re_trace_prod(cons[k], zinv) - b[k] -
                           re_trace_prod(cons[k], xrdzi);
                if (corr) v -= re_trace_prod(cons[k], corr_zi);
                rhs[k] = v;
            }
            dy = schur_solve(rhs);
            dz = rd;
            for (int k = 0; k < m; ++k) dz += dy[k] * cons[k].a;
            dz = 0.5 * (dz + dz.adjoint()).eval();
            MatrixXcd dzzi = dz * zinv;
            dx = sigma_mu * zinv - x - x * dzzi;
            if (corr) dx -= corr_zi;
            dx = 0.5 * (dx + dx.adjoint()).eval();
        };

        MatrixXcd dx_a, dz_a, dx, dz;
        VectorXd dy_a, dy;
        solve_direction(0.0, nullptr, dx_a, dy_a, dz_a);

        double ap_a = std::min(1.0, step_to_boundary(llt_x, dx_a));
        double ad_a = std::min(1.0, step_to_boundary(llt_z, dz_a));
        double mu_aff = re_inner(x + ap_a * dx_a, z + ad_a * dz_a) / n;
        mu_aff = std::max(mu_aff, 0.0);
        double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 1e-8, 1.0);

        MatrixXcd corr = dx_a * dz_a;
        solve_direction(sigma * mu, &corr, dx, dy, dz);

        const double tau = 0.95;
        double ap = std::min(1.0, tau * step_to_boundary(llt_x, dx));
        double ad = std::min(1.0, tau * step_to_boundary(llt_z, dz));

        // keep PD under roundoff
        for (int back = 0; back < 8; ++back) {
            MatrixXcd xn = x + ap * dx;
            if (Eigen::LLT<MatrixXcd>(xn).info() == Eigen::Success) break;
            ap *= 0.7;
        }
        for (int back = 0; back < 8; ++back) {
            MatrixXcd zn = z + ad * dz;
            if (Eigen::LLT<MatrixXcd>(zn).info() == Eigen::Success) break;
            ad *= 0.7;
        }
        if (ap < 1e-10 && ad < 1e-10) break;

        x += ap * dx;
        y += ad * dy;
        z += ad * dz;
        x = 0.5 * (x + x.adjoint()).eval();
        z = 0.5 * (z + z.adjoint()).eval();
    }
    return res;
}

} // namespace

ConeSolution solve_sdp(const ConicProblem& p, double tolerance) {
    if (p.dim < 1) throw std::invalid_argument("solve_sdp: dim must be >= 1");
    if (p.dim > kMaxDim) throw std::invalid_argument("solve_sdp: dimension exceeds desk-scale guard");
    if (p.objective.rows() != p.dim || p.objective.cols() != p.dim)
        throw std::invalid_argument("solve_sdp: objective dimension mismatch");
    if (p.constraints.empty() && p.fixed_entries.empty())
        throw std::invalid_argument("solve_sdp: needs at least one constraint");
    require_hermitian(p.objective, "objective");

    const int d = p.dim;
    ConeSolution sol;
    sol.solver_tolerance = tolerance;

    // pins become equality constraints via Hermitian selectors
    std::vector<Constraint> eqs, ineqs;  // ineqs normalized to <=
    auto add_eq = [&](MatrixXcd a, double rhs) {
        eqs.push_back(make_constraint(std::move(a), rhs));
    };
    for (const auto& pin : p.fixed_entries) {
        if (pin.row < 0 || pin.row >= d || pin.col < 0 || pin.col >= d)
            throw std::invalid_argument("solve_sdp: pin index out of range");
        if (pin.row == pin.col) {
            if (std::abs(pin.value.imag()) > 1e-12)
                throw std::invalid_argument("solve_sdp: diagonal pin must be real");
            MatrixXcd a = MatrixXcd::Zero(d, d);
            a(pin.row, pin.row) = 1.0;
            add_eq(std::move(a), pin.value.real());
        } else {
            MatrixXcd ar = MatrixXcd::Zero(d, d);
            ar(pin.row, pin.col) = 0.5;
            ar(pin.col, pin.row) = 0.5;
            add_eq(std::move(ar), pin.value.real());
            MatrixXcd ai = MatrixXcd::Zero(d, d);
            ai(pin.row, pin.col) = cplx(0.0, 0.5);
            ai(pin.col, pin.row) = cplx(0.0, -0.5);
            add_eq(std::move(ai), pin.value.imag());
        }
    }
    for (const auto& tc : p.constraints) {
        if (tc.a.rows() != d || tc.a.cols() != d)
            throw std::invalid_argument("solve_sdp: constraint dimension mismatch");
        require_hermitian(tc.a, "constraint");
        MatrixXcd a = 0.5 * (tc.a + tc.a.adjoint());
        double rhs = tc.rhs;
        if (tc.sense == ConstraintSense::GE) {
            a = -a;
            rhs = -rhs;
        }
        if (a.norm() < 1e-300) {
            if (tc.sense == ConstraintSense::EQ ? std::abs(rhs) > 1e-12 : rhs < -1e-12) {
                sol.status = SolveStatus::Infeasible;
                sol.x = MatrixXcd::Zero(d, d);
                return sol;
            }
            continue;
        }
        if (tc.sense == ConstraintSense::EQ)
            eqs.push_back(make_constraint(std::move(a), rhs));
        else
            ineqs.push_back(make_constraint(std::move(a), rhs));
    }

    // Ruiz equilibration over the variable dimensions
    VectorXd dscale = VectorXd::Ones(d);
    {
        std::vector<const MatrixXcd*> mats;
        mats.push_back(&p.objective);
        for (auto& cc : eqs) mats.push_back(&cc.a);
        for (auto& cc : ineqs) mats.push_back(&cc.a);
        for (int pass = 0; pass < 8; ++pass) {
            VectorXd rmax = VectorXd::Zero(d);
            for (const auto* mp : mats)
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        rmax[i] = std::max(rmax[i],
                                           std::abs((*mp)(i, j)) * dscale[i] * dscale[j]);
            for (int i = 0; i < d; ++i)
                if (rmax[i] > 1e-280) dscale[i] /= std::sqrt(std::sqrt(rmax[i]));
        }
    }
    auto apply_scale = [&](const MatrixXcd& a) {
        return MatrixXcd(dscale.asDiagonal() * a * dscale.asDiagonal());
    };

    const int n_ineq = static_cast<int>(ineqs.size());
    const int n = d + n_ineq;
    MatrixXcd cbig = MatrixXcd::Zero(n, n);
    cbig.topLeftCorner(d, d) = apply_scale(p.objective);
    // unit objective norm keeps the relative-gap test meaningful for
    // channel-magnitude coefficients
    double cscale = std::max(cbig.norm(), 1e-300);
    cbig /= cscale;

    std::vector<Constraint> cons;
    cons.reserve(eqs.size() + ineqs.size());
    auto push_scaled = [&](const Constraint& src, int slack_idx) {
        Constraint c;
        c.a = MatrixXcd::Zero(n, n);
        c.a.topLeftCorner(d, d) = apply_scale(src.a);
        if (slack_idx >= 0) c.a(d + slack_idx, d + slack_idx) = 1.0;
        double s = std::max(c.a.norm(), std::abs(src.rhs) / 10.0);
        c.a /= s;
        c.rhs = src.rhs / s;
        detect_sparsity(c);
        cons.push_back(std::move(c));
    };
    for (const auto& cc : eqs) push_scaled(cc, -1);
    for (int i = 0; i < n_ineq; ++i) push_scaled(ineqs[i], i);

    IpmResult ipm = ipm_solve(cbig, cons, tolerance);

    sol.iterations = ipm.iterations;
    sol.x = dscale.asDiagonal() * ipm.x.topLeftCorner(d, d) * dscale.asDiagonal();
    sol.x = 0.5 * (sol.x + sol.x.adjoint()).eval();
    sol.objective_value = re_inner(p.objective, sol.x);
    if (ipm.reldres < 1e-7) sol.dual_bound = ipm.dobj * cscale;

    if (ipm.converged) {
        sol.status = SolveStatus::Optimal;
        return sol;
    }

    // Degenerate faces (singular PSD blocks at the optimum, as the lifted
    // SOC rotation produces) cap the attainable residual. Recover a usable
    // point: project back onto the active constraints, re-clip to the cone,
    // and accept if the duality gap against the dual-feasible bound is tiny.
    auto feas_error = [&](const MatrixXcd& x) {
        double worst = 0.0;
        for (const auto& cc : eqs)
            worst = std::max(worst, std::abs(re_inner(cc.a, x) - cc.rhs) /
                                        (1.0 + std::abs(cc.rhs)));
        for (const auto& cc : ineqs)
            worst = std::max(worst, std::max(0.0, re_inner(cc.a, x) - cc.rhs) /
                                        (1.0 + std::abs(cc.rhs)));
        return worst;
    };
    if (ipm.reldres < 1e-7 && ipm.relpres < 1e-4) {
        // unit-norm copies so the Gram system treats all constraints alike
        std::vector<Constraint> norm_eq, norm_in;
        for (const auto& cc : eqs)
            norm_eq.push_back(make_constraint(cc.a / cc.a.norm(), cc.rhs / cc.a.norm()));
        for (const auto& cc : ineqs)
            norm_in.push_back(make_constraint(cc.a / cc.a.norm(), cc.rhs / cc.a.norm()));
        MatrixXcd x = sol.x;
        auto project_constraints = [&](MatrixXcd& y) {
            std::vector<const Constraint*> act;
            for (const auto& cc : norm_eq) act.push_back(&cc);
            for (const auto& cc : norm_in)
                if (re_inner(cc.a, y) > cc.rhs) act.push_back(&cc);
            const int na = static_cast<int>(act.size());
            if (na == 0) return;
            MatrixXd gram(na, na);
            VectorXd resid(na);
            for (int i = 0; i < na; ++i) {
                resid[i] = act[i]->rhs - re_inner(act[i]->a, y);
                for (int j = 0; j <= i; ++j) {
                    gram(i, j) = re_inner(act[i]->a, act[j]->a);
                    gram(j, i) = gram(i, j);
                }
            }
            gram.diagonal().array() += 1e-12;
            VectorXd lam = Eigen::LDLT<MatrixXd>(gram).solve(resid);
            for (int i = 0; i < na; ++i) y += lam[i] * act[i]->a;
        };
        // alternating projections, ending on the constraint side; the cone
        // side then holds to the -1e-7 lambda_min contract
        for (int pass = 0; pass < 40; ++pass) {
            project_constraints(x);
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(x);
            double lmax = std::max(1.0, es.eigenvalues().maxCoeff());
            if (es.eigenvalues().minCoeff() >= -1e-9 * lmax) break;
            VectorXd ev = es.eigenvalues().cwiseMax(0.0);
            x = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
        }
        project_constraints(x);
        double feas = feas_error(x);
        double pobj = re_inner(p.objective, x);
        double dual_bound = ipm.dobj * cscale;
        double gap = (dual_bound - pobj) / (1.0 + std::abs(pobj) + std::abs(dual_bound));
        Eigen::SelfAdjointEigenSolver<MatrixXcd> esx(x, Eigen::EigenvaluesOnly);
        bool psd_ok = esx.eigenvalues().minCoeff() >=
                      -1e-7 * std::max(1.0, esx.eigenvalues().maxCoeff());
        // slightly negative gaps happen within the feasibility tolerance
        if (psd_ok && feas <= 1e-6 && gap <= 3e-4 && gap >= -1e-5) {
            sol.x = x;
            sol.objective_value = pobj;
            sol.solver_tolerance = std::max({tolerance, feas, std::abs(gap)});
            sol.status = SolveStatus::Optimal;
            return sol;
        }
    }

    // classification heuristics: a wildly diverging dual objective with small
    // dual residual behaves like a primal infeasibility certificate; so does
    // a collapsed barrier parameter with a stuck primal residual.
    if ((ipm.dobj < -1e8 && ipm.reldres < 1e-4) ||
        (ipm.relpres > 50.0 * tolerance && ipm.relgap < 1e-6))
        sol.status = SolveStatus::Infeasible;
    else
        sol.status = SolveStatus::NumericalFailure;
    return sol;
}

// ---- 2-D QP -------------------------------------------------------------

namespace {

double qp_obj(const Qp2dProblem& q, const Eigen::Vector2d& t) {
    return 0.5 * t.dot(q.h * t) + q.b.dot(t);
}

bool qp_feasible(const std::vector<HalfPlane>& planes,
                 const std::optional<Disc>& disc, const Eigen::Vector2d& t,
                 double tol) {
    for (const auto& hp : planes)
        if (hp.a.dot(t) > hp.c + tol) return false;
    if (disc && (t - disc->center).norm() > disc->radius + tol) return false;
    return true;
}

} // namespace

Qp2dResult solve_qp2d(const Qp2dProblem& q) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> hes(q.h);
    if (hes.eigenvalues().maxCoeff() >= 0.0)
        throw std::invalid_argument("solve_qp2d: H must be negative definite");

    // normalized half-planes: cuts + box edges, slack measured in meters
    std::vector<HalfPlane> planes;
    for (const auto& hp : q.cuts) {
        double nrm = hp.a.norm();
        if (nrm < 1e-300) {
            if (hp.c < 0.0) return {};  // 0 <= c violated: empty region
            continue;
        }
        planes.push_back({hp.a / nrm, hp.c / nrm});
    }
    planes.push_back({{1.0, 0.0}, q.box_hi[0]});
    planes.push_back({{-1.0, 0.0}, -q.box_lo[0]});
    planes.push_back({{0.0, 1.0}, q.box_hi[1]});
    planes.push_back({{0.0, -1.0}, -q.box_lo[1]});

    const double tol = 1e-9 * (1.0 + q.box_hi.cwiseAbs().maxCoeff() +
                               q.box_lo.cwiseAbs().maxCoeff());
    std::vector<Eigen::Vector2d> cands;

    Eigen::Matrix2d hinv = q.h.inverse();
    Eigen::Vector2d t0 = -hinv * q.b;
    if (qp_feasible(planes, q.disc, t0, tol)) {
        // strictly concave: the interior stationary point is the global max
        return {true, t0, qp_obj(q, t0), 0.0};
    }
    cands.push_back(t0);

    const int np = static_cast<int>(planes.size());
    for (int i = 0; i < np; ++i) {
        const auto& hp = planes[i];
        double denom = hp.a.dot(hinv * hp.a);
        if (std::abs(denom) < 1e-300) continue;
        double nu = (hp.c - hp.a.dot(t0)) / denom;
        cands.push_back(t0 + nu * (hinv * hp.a));
    }
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j) {
            Eigen::Matrix2d a;
            a.row(0) = planes[i].a.transpose();
            a.row(1) = planes[j].a.transpose();
            double det = a.determinant();
            if (std::abs(det) < 1e-12) continue;
            cands.push_back(a.inverse() * Eigen::Vector2d(planes[i].c, planes[j].c));
        }

    if (q.disc) {
        const Eigen::Vector2d c0 = q.disc->center;
        const double r = q.disc->radius;
        // disc active alone: (H - mI) t = -b - m c0, ||t - c0|| = r, m >= 0.
        // In H's eigenbasis phi(m) = sum v_i^2/(lam_i - m)^2 is decreasing.
        Eigen::Vector2d v = hes.eigenvectors().transpose() * (q.b + q.h * c0);
        auto phi = [&](double mm) {
            double s = 0.0;
            for (int i = 0; i < 2; ++i) {
                double dd = hes.eigenvalues()[i] - mm;
                s += v[i] * v[i] / (dd * dd);
            }
            return s;
        };
        if (r > 0.0 && phi(0.0) > r * r) {
            double lo = 0.0, hi = 1.0;
            while (phi(hi) > r * r && hi < 1e300) hi *= 4.0;
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                (phi(mid) > r * r ? lo : hi) = mid;
            }
            double m = 0.5 * (lo + hi);
            Eigen::Matrix2d hm = q.h - m * Eigen::Matrix2d::Identity();
            cands.push_back(hm.inverse() * (-q.b - m * c0));
        }
        cands.push_back(c0);  // radius ~ 0 or interior fallback
        // disc boundary intersected with each plane line
        for (const auto& hp : planes) {
            Eigen::Vector2d p = hp.a * hp.c;  // closest point of the line to origin
            Eigen::Vector2d dir(-hp.a[1], hp.a[0]);
            Eigen::Vector2d w = p - c0;
            double proj = w.dot(dir);
            double rad2 = r * r - (w - proj * dir).squaredNorm();
            if (rad2 < 0.0) continue;
            double hw = std::sqrt(rad2);
            cands.push_back(p + (-proj + hw) * dir);
            cands.push_back(p + (-proj - hw) * dir);
        }
    }

    Qp2dResult best;
    for (const auto& t : cands) {
        if (!t.allFinite() || !qp_feasible(planes, q.disc, t, tol)) continue;
        double obj = qp_obj(q, t);
        if (!best.feasible || obj > best.objective) {
            best.feasible = true;
            best.t = t;
            best.objective = obj;
        }
    }
    if (!best.feasible) return best;

    // KKT stationarity check: grad f = sum(lambda_i a_i) + m*(t - c0)/r terms
    // over the active constraints, multipliers from least squares.
    Eigen::Vector2d grad = q.h * best.t + q.b;
    std::vector<Eigen::Vector2d> act;
    for (const auto& hp : planes)
        if (hp.a.dot(best.t) > hp.c - 1e-7 * (1.0 + std::abs(hp.c))) act.push_back(hp.a);
    if (q.disc) {
        double dr = (best.t - q.disc->center).norm();
        if (dr > q.disc->radius - 1e-7 * (1.0 + q.disc->radius) && dr > 0.0)
            act.push_back((best.t - q.disc->center) / dr);
    }
    if (act.empty()) {
        best.kkt_residual = grad.norm();
    } else {
        Eigen::MatrixXd amat(2, act.size());
        for (std::size_t i = 0; i < act.size(); ++i) amat.col(i) = act[i];
        Eigen::VectorXd lam = amat.colPivHouseholderQr().solve(grad);
        best.kkt_residual = (amat * lam - grad).norm();
    }
    return best;
}

} // namespace fasaris
