#pragma once

#include <Eigen/Dense>
#include <complex>

#include "fasaris/scenario.hpp"

namespace fasaris {

using Mat2X = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// FA positions at the BS (movable) and ARIS element positions (fixed),
// both as rows of local 2-D coordinates in meters.
struct AntennaLayout {
    Mat2X t_bar;  // N x 2
    Mat2X r_bar;  // M x 2
};

// The three assembled channels for a given layout.
struct Channels {
    Eigen::MatrixXcd h_br;     // M x N
    Eigen::RowVectorXcd h_ru;  // 1 x M
    Eigen::RowVectorXcd h_bu;  // 1 x N
};

// Row-major grid with `spacing`, ceil(sqrt(count)) columns, centered at the
// origin. Used for the FA initialization and the fixed ARIS array.
Mat2X grid_layout(int count, double spacing);

// ARIS elements as a lambda/2 uniform planar array centered at the
// reference point (local coordinates).
Mat2X aris_layout(const ScenarioConfig& cfg);

// Initial FA grid (lambda/2 spacing) centered in S_t. Throws if the grid
// does not fit inside the region.
Mat2X initial_fa_grid(const ScenarioConfig& cfg);

// Per-path phase signature of a transmit position:
// entry s = exp(j*(2pi/lambda)*(x*sin(theta_s)cos(phi_s) + y*cos(theta_s))).
Eigen::VectorXcd field_response_tx(const Eigen::Vector2d& pos,
                                   const Eigen::VectorXd& theta,
                                   const Eigen::VectorXd& phi,
                                   double wavelength);

// Receive-side variant (same functional form, arrival angles).
Eigen::VectorXcd field_response_rx(const Eigen::Vector2d& pos,
                                   const Eigen::VectorXd& theta,
                                   const Eigen::VectorXd& phi,
                                   double wavelength);

// Stacks field responses column-wise for a set of positions.
Eigen::MatrixXcd response_matrix(const Mat2X& positions,
                                 const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& phi,
                                 double wavelength);

// H_BR = F_BR^H Sigma_BR Upsilon_BR, h_RU = 1^H Sigma_RU Upsilon_RU(r),
// h_BU = 1^H Sigma_BU Upsilon_BU. Sigma matrices are diagonal.
Channels assemble_channels(const ScenarioDraw& draw, const AntennaLayout& layout,
                           const ScenarioConfig& cfg);

} // namespace fasaris
