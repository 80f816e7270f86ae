#include "fasaris/beamform.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace fasaris {

BeamContext build_beam_context(const Channels& ch, const Eigen::VectorXcd& e,
                               const ScenarioConfig& cfg) {
    BeamContext ctx;
    ctx.p0 = cfg.p0_w;
    const Eigen::Index n = ch.h_bu.size();
    if (e.size() > 0) {
        Eigen::MatrixXcd eh = e.asDiagonal() * ch.h_br;  // E H_BR
        ctx.varpi = ch.h_bu + ch.h_ru.cwiseProduct(e.transpose()) * ch.h_br;
        ctx.b_matrix = eh.adjoint() * eh;
        ctx.p1_effective = cfg.p1_w - cfg.sigma_r_sq * e.squaredNorm();
    } else {
        ctx.varpi = ch.h_bu;
        ctx.b_matrix = Eigen::MatrixXcd::Zero(n, n);
        ctx.p1_effective = cfg.p1_w;
    }
    return ctx;
}

ConicProblem build_beam_sdp(const BeamContext& ctx) {
    if (!(ctx.p1_effective > 0.0))
        throw std::domain_error("aris_budget_exhausted");
    const int n = static_cast<int>(ctx.varpi.size());
    ConicProblem p;
    p.dim = n;
    p.objective = ctx.varpi.adjoint() * ctx.varpi;
    p.constraints.push_back({Eigen::MatrixXcd::Identity(n, n), ConstraintSense::LE, ctx.p0});
    Eigen::MatrixXcd b = 0.5 * (ctx.b_matrix + ctx.b_matrix.adjoint());
    p.constraints.push_back({std::move(b), ConstraintSense::LE, ctx.p1_effective});
    return p;
}

Eigen::VectorXcd reconstruct_rank_one(const Eigen::MatrixXcd& w_hat,
                                      const Eigen::RowVectorXcd& varpi) {
    std::complex<double> q = (varpi * w_hat * varpi.adjoint())(0);
    if (q.real() <= 1e-300)
        return Eigen::VectorXcd::Zero(varpi.size());
    return (w_hat * varpi.adjoint()) / std::sqrt(q.real());
}

Eigen::VectorXcd optimize_beamforming(const Channels& ch, const Eigen::VectorXcd& e,
                                      const ScenarioConfig& cfg) {
    BeamContext ctx = build_beam_context(ch, e, cfg);
    const int n = static_cast<int>(ctx.varpi.size());
    if (ctx.varpi.norm() == 0.0) return Eigen::VectorXcd::Zero(n);

    ConeSolution sol = solve_sdp(build_beam_sdp(ctx));
    if (sol.status != SolveStatus::Optimal)
        throw std::runtime_error("optimize_beamforming: SDP solve failed");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sol.x);
    Eigen::VectorXd ev = es.eigenvalues();
    double l1 = ev[n - 1];
    double l2 = n > 1 ? ev[n - 2] : 0.0;

    Eigen::VectorXcd w;
    if (l1 <= 0.0) {
        w = Eigen::VectorXcd::Zero(n);
    } else if (l2 / l1 < 1e-8) {
        w = std::sqrt(l1) * es.eigenvectors().col(n - 1);
    } else {
        w = reconstruct_rank_one(sol.x, ctx.varpi);
    }

    // solver noise can leave a constraint marginally hot; scaling down keeps
    // the feasible set and barely moves the objective
    double p = w.squaredNorm();
    if (p > ctx.p0) w *= std::sqrt(ctx.p0 / p);
    double q = (w.adjoint() * ctx.b_matrix * w)(0).real();
    if (q > ctx.p1_effective) w *= std::sqrt(ctx.p1_effective / q);

    // fix the free global phase so varpi*w is real nonnegative
    std::complex<double> s = (ctx.varpi * w)(0);
    if (std::abs(s) > 0.0) w *= std::conj(s) / std::abs(s);
    return w;
}

} // namespace fasaris
