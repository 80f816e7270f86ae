#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fasaris/channel.hpp"

namespace fasaris {

// A candidate operating point: beamformer, reflection diagonal, layout.
struct Solution {
    Eigen::VectorXcd w;       // N
    Eigen::VectorXcd e;       // M, e_m = beta_m * exp(j*theta_m)
    AntennaLayout layout;
    double rate_bits = 0.0;
    std::vector<double> trace;  // per-outer-iteration rates
};

// R = log2(1 + |(h_RU E H_BR + h_BU) w|^2 / (sigma_r^2 ||h_RU E||^2 + sigma_u^2))
double achievable_rate(const Channels& ch, const Eigen::VectorXcd& w,
                       const Eigen::VectorXcd& e, double sigma_r_sq,
                       double sigma_u_sq);

// SINR (the argument of log2(1 + .) above); handy for the reflect module.
double achieved_sinr(const Channels& ch, const Eigen::VectorXcd& w,
                     const Eigen::VectorXcd& e, double sigma_r_sq,
                     double sigma_u_sq);

// ||E H_BR w||^2 + sigma_r^2 ||E||_F^2
double aris_power(const Channels& ch, const Eigen::VectorXcd& w,
                  const Eigen::VectorXcd& e, double sigma_r_sq);

// Which constraint family the solution is held to; the passive baseline
// replaces the ARIS power budget with unit-modulus amplitudes.
enum class ConstraintSet { Active, Passive };

struct FeasibilityReport {
    bool ok = true;
    // each entry: constraint name + slack (negative slack = violated amount)
    std::vector<std::pair<std::string, double>> violations;
};

// Verifies ||w||^2 <= P0, the ARIS budget (or unit amplitudes for Passive),
// positions inside S_t and pairwise distance >= D, all with 1e-6 relative
// tolerance. Violated constraints are listed with their slack.
FeasibilityReport check_feasibility(const Solution& sol, const Channels& ch,
                                    const ScenarioConfig& cfg,
                                    ConstraintSet set = ConstraintSet::Active);

} // namespace fasaris
