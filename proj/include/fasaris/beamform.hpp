#pragma once

#include <Eigen/Dense>

#include "fasaris/channel.hpp"
#include "fasaris/conic.hpp"

namespace fasaris {

// Data of the beamforming sub-problem for fixed (layout, E):
// maximize |varpi w|^2 s.t. ||w||^2 <= p0, w^H B w <= p1_effective.
struct BeamContext {
    Eigen::RowVectorXcd varpi;   // h_RU E H_BR + h_BU
    Eigen::MatrixXcd b_matrix;   // H_BR^H E^H E H_BR, Hermitian PSD
    double p0 = 0.0;
    double p1_effective = 0.0;   // P1 - sigma_r^2 ||E||_F^2
};

BeamContext build_beam_context(const Channels& ch, const Eigen::VectorXcd& e,
                               const ScenarioConfig& cfg);

// Lifts to the rank-relaxed SDP over W = w w^H. Throws std::domain_error
// "aris_budget_exhausted" when p1_effective <= 0.
ConicProblem build_beam_sdp(const BeamContext& ctx);

// Closed-form rank-one reconstruction w = (varpi W varpi^H)^{-1/2} W varpi^H.
// Preserves the objective exactly and never increases either trace
// constraint. Returns zero (degenerate) when varpi W varpi^H <= 0.
Eigen::VectorXcd reconstruct_rank_one(const Eigen::MatrixXcd& w_hat,
                                      const Eigen::RowVectorXcd& varpi);

// Full sub-problem: SDP solve, rank-one branch on the eigenvalue ratio,
// post-scaling keeps both power constraints within 1e-6 relative.
Eigen::VectorXcd optimize_beamforming(const Channels& ch, const Eigen::VectorXcd& e,
                                      const ScenarioConfig& cfg);

} // namespace fasaris
