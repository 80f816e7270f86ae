#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fasaris/channel.hpp"
#include "fasaris/conic.hpp"

namespace fasaris {

// Sum of cosine terms c_j * 2Re{exp(j u_j^T t)}: the trigonometric expansion
// of the per-antenna objective and of the power surrogate target. Value,
// gradient and Hessian are all analytic in this form.
struct PhaseExpansion {
    struct Term {
        std::complex<double> coef;
        Eigen::Vector2d freq;
    };
    double constant = 0.0;
    std::vector<Term> terms;

    double value(const Eigen::Vector2d& t) const;
    Eigen::Vector2d gradient(const Eigen::Vector2d& t) const;
    Eigen::Matrix2d hessian(const Eigen::Vector2d& t) const;
};

// Channel pieces invariant to the FA positions, shared across the
// per-antenna updates of one scenario.
struct ChannelParts {
    Eigen::VectorXcd sigma_br, sigma_bu;
    Eigen::MatrixXcd f_br;       // L x M receive responses at the ARIS
    Eigen::RowVectorXcd h_ru;
    Eigen::VectorXd br_dir_x, br_dir_y;  // sin(theta)cos(phi), cos(theta)
    Eigen::VectorXd bu_dir_x, bu_dir_y;
    double wavelength = 0.0;
};

ChannelParts make_channel_parts(const ScenarioDraw& draw, const Mat2X& r_bar,
                                const ScenarioConfig& cfg);

// Everything the n-th antenna's MM step needs, expanded around the current
// position t_q. mu/alpha/beta follow the objective decomposition; tau, c1,
// c2, eta, p1_hat belong to the power-constraint surrogate chain.
struct PositionContext {
    int n = 0;
    Eigen::Vector2d t_q;
    double wavelength = 0.0;
    Eigen::VectorXd br_dir_x, br_dir_y;  // per-path direction cosines
    Eigen::VectorXd bu_dir_x, bu_dir_y;
    Eigen::VectorXcd xi;        // L
    Eigen::VectorXcd omega;     // L
    Eigen::MatrixXcd w_mat;     // w w^H
    Eigen::VectorXcd mu;        // mu_l at the current layout
    std::complex<double> alpha_tilde{};
    double beta_tilde = 0.0;    // verification only
    Eigen::MatrixXcd psi;       // Hermitian PSD, L x L
    Eigen::MatrixXcd psi_tilde; // |w_n|^2 Psi
    double phi_scale = 0.0;     // lambda_max(psi_tilde)
    Eigen::VectorXcd tau;
    double c1 = 0.0, c2 = 0.0;
    Eigen::VectorXcd eta;
    double p1_hat = 0.0;
    double kappa = 0.0;      // curvature bound for g
    double kappa_hat = 0.0;  // curvature bound for the power target
    Eigen::MatrixXcd omega_outer, xi_outer;

    PhaseExpansion g_exp;     // g(t)
    PhaseExpansion ghat_exp;  // 2Re{zeta^H(t) eta}
};

PositionContext build_position_context(const ChannelParts& parts,
                                       const Eigen::VectorXcd& w,
                                       const Eigen::VectorXcd& e,
                                       const Mat2X& t_bar, int n,
                                       const ScenarioConfig& cfg);

// g via the trigonometric expansion.
double g_value(const Eigen::Vector2d& t, const PositionContext& ctx);
// g via complex arithmetic, [W]_nn |mu_n|^2 + 2Re{alpha mu_n}; the second
// route for the two-formula cross-check.
double g_value_direct(const Eigen::Vector2d& t, const PositionContext& ctx);
Eigen::Vector2d grad_g(const Eigen::Vector2d& t, const PositionContext& ctx);
Eigen::Matrix2d hess_g(const Eigen::Vector2d& t, const PositionContext& ctx);

// Closed-form kappa_n with kappa I >= hess g everywhere.
double kappa_bound(const PositionContext& ctx);

// Power target ghat(t) = 2Re{zeta_BR^H(t) eta} and its quadratic majorant
// delta(t) = ghat(t_q) + grad^T (t - t_q) + (kappa_hat/2)||t - t_q||^2.
double ghat_value(const Eigen::Vector2d& t, const PositionContext& ctx);

struct PowerSurrogate {
    Eigen::Vector2d t_q;
    double value_q = 0.0;
    Eigen::Vector2d grad_q;
    double kappa_hat = 0.0;
    double eval(const Eigen::Vector2d& t) const {
        Eigen::Vector2d d = t - t_q;
        return value_q + grad_q.dot(d) + 0.5 * kappa_hat * d.squaredNorm();
    }
};

PowerSurrogate power_surrogate(const PositionContext& ctx);

struct PositionStep {
    Eigen::Vector2d t;
    bool moved = false;
    bool stalled = false;
};

// One MM step for antenna n: concave QP over the linearized distance cuts,
// the power-surrogate disc and the box. Keeps t_q when the QP stalls or the
// surrogate guarantee fails.
PositionStep update_position(const PositionContext& ctx, const Mat2X& t_bar,
                             const ScenarioConfig& cfg);

struct PositionResult {
    Mat2X t_bar;
    int sweeps = 0;
    bool stalled = false;
};

// Gauss-Seidel sweeps n = 1..N with fresh contexts until the rate gain
// drops below eps1 or the sweep cap. Accepted layouts always satisfy the
// true (non-linearized) constraints.
PositionResult optimize_positions(const ScenarioDraw& draw, const AntennaLayout& layout,
                                  const Eigen::VectorXcd& w, const Eigen::VectorXcd& e,
                                  const ScenarioConfig& cfg);

} // namespace fasaris
