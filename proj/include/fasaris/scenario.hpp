#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>

#include "fasaris/rng.hpp"

namespace fasaris {

// All physical and algorithmic parameters. Raw fields keep the dB/dBm units
// they are specified in; validate() converts to linear units once and the
// rest of the library only touches the *_w / *_lin members.
struct ScenarioConfig {
    int n_antennas = 4;   // N, BS fluid antennas
    int m_elements = 4;   // M, ARIS elements (0 disables the ARIS)
    int n_paths = 5;      // L, per-link path count
    double wavelength = 0.25;

    Eigen::Vector3d bs_pos{0.0, 0.0, 0.0};
    Eigen::Vector3d aris_pos{30.0, 0.0, 5.0};
    Eigen::Vector3d ue_pos{70.0, 10.0, 0.0};

    double p0_dbm = 20.0;
    double p1_dbm = 10.0;
    double sigma_r_dbm = -70.0;
    double sigma_u_dbm = -70.0;
    double k0_db = -30.0;
    double d0 = 1.0;
    double alpha_br = 2.2;
    double alpha_ru = 3.0;
    double alpha_bu = 3.0;
    double rician_iota = 0.5;

    double min_dist = 0.125;     // D = lambda/2
    double region_half = 0.5;    // A/2, S_t = [-A/2, A/2]^2 with A = 4*lambda

    double eps1 = 1e-5;
    double eps2 = 1e-5;
    double eps3 = 1e-4;
    int max_outer_iters = 50;
    int max_inner_iters = 30;
    double srcr_eps0 = 0.1;

    // Linear-unit derivations, filled by validate().
    double p0_w = 0.0;
    double p1_w = 0.0;
    double sigma_r_sq = 0.0;
    double sigma_u_sq = 0.0;
    double k0_lin = 0.0;

    // Checks invariants and computes the linear-unit fields.
    // Throws std::invalid_argument on violation.
    void validate();

    double dist_br() const { return (aris_pos - bs_pos).norm(); }
    double dist_ru() const { return (ue_pos - aris_pos).norm(); }
    double dist_bu() const { return (ue_pos - bs_pos).norm(); }
};

// Parses the flat `key = value` config format ('#' comments, keys must match
// ScenarioConfig field names; unknown keys are errors). Defaults reproduce
// the standard setup above. Throws std::invalid_argument on bad input.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

// Per-link departure/arrival angles, radians, all in [0, pi].
struct LinkAngles {
    Eigen::VectorXd theta_t, phi_t;  // departure elevation/azimuth, length L
    Eigen::VectorXd theta_r, phi_r;  // arrival side, length L
};

// One random channel realization: angles plus the diagonal entries of each
// path response matrix. Deterministic function of (cfg, seed).
struct ScenarioDraw {
    LinkAngles br, bu, ru;
    Eigen::VectorXcd sigma_br, sigma_ru, sigma_bu;
    std::uint64_t seed = 0;
};

// dBm -> watts
double convert_dbm(double p_dbm);

// Linear power gain K0 * (d/d0)^(-alpha). Throws on non-positive distance.
double path_loss(double distance, double exponent, const ScenarioConfig& cfg);

// Draws angles ~ U[0, pi] i.i.d. and path gains with the LoS/NLoS split:
// BR/RU entry 0 is LoS with variance PL*iota/(iota+1), entries >= 1 NLoS with
// variance PL/((iota+1)(L-1)); BU entries are all-NLoS with variance PL/L.
// Throws if L == 1 (NLoS variance undefined for BR/RU).
ScenarioDraw sample_scenario(const ScenarioConfig& cfg, std::uint64_t seed);

// FNV-1a over the draw contents; used for the paired-draw sweep contract.
std::uint64_t draw_hash(const ScenarioDraw& draw);

} // namespace fasaris
