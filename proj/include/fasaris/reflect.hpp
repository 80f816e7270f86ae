#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fasaris/channel.hpp"
#include "fasaris/conic.hpp"

namespace fasaris {

// Block matrices of the lifted fractional program: for e~ = [e^H, 1]^H,
//   e~^H V  e~ + direct_power = |(h_RU E H_BR + h_BU) w|^2
//   e~^H V~ e~                = sigma_r^2 ||h_RU E||^2 + sigma_u^2
//   e~^H V^ e~                = ||E H_BR w||^2 + sigma_r^2 ||E||_F^2
struct VMatrices {
    Eigen::MatrixXcd v;      // (M+1) x (M+1)
    Eigen::MatrixXcd v_bar;
    Eigen::MatrixXcd v_hat;
    double direct_power = 0.0;  // |h_BU w|^2
};

VMatrices build_v_matrices(const Channels& ch, const Eigen::VectorXcd& w,
                           double sigma_r_sq, double sigma_u_sq);

// Lift e (diagonal of E) to e~ = [conj(e); 1] and its rank-one matrix.
Eigen::VectorXcd lift_e(const Eigen::VectorXcd& e);
Eigen::MatrixXcd lift_e_matrix(const Eigen::VectorXcd& e);

// SRCR cut u_max^H E~ u_max >= vartheta * Tr(E~) as a trace constraint on
// the (M+1)-dimensional block.
TraceConstraint srcr_cut(const Eigen::MatrixXcd& e_tilde_prev, double vartheta);

// vartheta update: min(1, lambda_max/Tr + eps).
double update_vartheta(const Eigen::MatrixXcd& e_tilde_new, double eps);

// Convex majorant of the bilinear chi*varrho around the expansion point,
// touching it exactly: f(chi_p, varrho_p; chi_p, varrho_p) = chi_p*varrho_p.
double bilinear_majorant(double chi, double varrho, double chi_p, double varrho_p);

struct ReflectState {
    Eigen::MatrixXcd e_tilde_mat;
    double chi = 0.0, varrho = 0.0;
    double vartheta = 0.0, eps = 0.0;
    Eigen::MatrixXcd v_mat, v_bar, v_hat;
    double direct_power = 0.0;
};

struct ReflectOptions {
    bool passive = false;  // unit-modulus pins instead of the power budget
};

struct ReflectResult {
    Eigen::VectorXcd e;
    int iterations = 0;
    bool stalled = false;
    double lifted_rate = 0.0;
    double rank_quality = 0.0;  // lambda_max/Tr of the final lifted matrix
    double chi_final = 0.0;
    std::vector<double> vartheta_trace;   // after successful solves
    Eigen::MatrixXcd e_tilde_final;
};

// Algorithm: bootstrap solve without the rank cut, then SRCR iterations with
// eps halving on infeasibility, SCA refresh of (chi, varrho) on success.
// Never returns an e that violates its constraint set, and never one worse
// than e_init.
ReflectResult optimize_reflection(const Channels& ch, const Eigen::VectorXcd& w,
                                  const ScenarioConfig& cfg,
                                  const Eigen::VectorXcd& e_init,
                                  const ReflectOptions& opts = {});

} // namespace fasaris
