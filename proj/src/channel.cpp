#include "fasaris/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fasaris {

Mat2X grid_layout(int count, double spacing) {
    int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
    int rows = (count + cols - 1) / cols;
    Mat2X pos(count, 2);
    // Center of mass of the full grid rectangle at the origin.
    double x0 = -0.5 * spacing * (cols - 1);
    double y0 = -0.5 * spacing * (rows - 1);
    for (int i = 0; i < count; ++i) {
        int r = i / cols, c = i % cols;
        pos(i, 0) = x0 + c * spacing;
        pos(i, 1) = y0 + r * spacing;
    }
    return pos;
}

Mat2X aris_layout(const ScenarioConfig& cfg) {
    if (cfg.m_elements == 0) return Mat2X(0, 2);
    return grid_layout(cfg.m_elements, cfg.wavelength / 2.0);
}

Mat2X initial_fa_grid(const ScenarioConfig& cfg) {
    Mat2X grid = grid_layout(cfg.n_antennas, cfg.wavelength / 2.0);
    if (grid.cwiseAbs().maxCoeff() > cfg.region_half + 1e-12)
        throw std::invalid_argument("initial grid does not fit inside S_t");
    return grid;
}

Eigen::VectorXcd field_response_tx(const Eigen::Vector2d& pos,
                                   const Eigen::VectorXd& theta,
                                   const Eigen::VectorXd& phi,
                                   double wavelength) {
    const Eigen::Index L = theta.size();
    Eigen::VectorXcd v(L);
    const double k = 2.0 * std::numbers::pi / wavelength;
    for (Eigen::Index s = 0; s < L; ++s) {
        double rho = pos[0] * std::sin(theta[s]) * std::cos(phi[s]) +
                     pos[1] * std::cos(theta[s]);
        v[s] = std::polar(1.0, k * rho);
    }
    return v;
}

Eigen::VectorXcd field_response_rx(const Eigen::Vector2d& pos,
                                   const Eigen::VectorXd& theta,
                                   const Eigen::VectorXd& phi,
                                   double wavelength) {
    return field_response_tx(pos, theta, phi, wavelength);
}

Eigen::MatrixXcd response_matrix(const Mat2X& positions,
                                 const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& phi,
                                 double wavelength) {
    Eigen::MatrixXcd m(theta.size(), positions.rows());
    for (Eigen::Index i = 0; i < positions.rows(); ++i)
        m.col(i) = field_response_tx(positions.row(i).transpose(), theta, phi, wavelength);
    return m;
}

Channels assemble_channels(const ScenarioDraw& draw, const AntennaLayout& layout,
                           const ScenarioConfig& cfg) {
    const int L = static_cast<int>(draw.sigma_bu.size());
    if (draw.sigma_br.size() != L && layout.r_bar.rows() > 0)
        throw std::invalid_argument("assemble_channels: inconsistent path counts");

    const double lam = cfg.wavelength;
    Eigen::MatrixXcd ups_bu = response_matrix(layout.t_bar, draw.bu.theta_t, draw.bu.phi_t, lam);

    Channels ch;
    ch.h_bu = draw.sigma_bu.transpose() * ups_bu;  // 1^H Sigma_BU = row of diagonal gains

    const Eigen::Index M = layout.r_bar.rows();
    if (M > 0) {
        Eigen::MatrixXcd ups_br = response_matrix(layout.t_bar, draw.br.theta_t, draw.br.phi_t, lam);
        Eigen::MatrixXcd f_br = response_matrix(layout.r_bar, draw.br.theta_r, draw.br.phi_r, lam);
        Eigen::MatrixXcd ups_ru = response_matrix(layout.r_bar, draw.ru.theta_t, draw.ru.phi_t, lam);
        ch.h_br = f_br.adjoint() * draw.sigma_br.asDiagonal() * ups_br;
        ch.h_ru = draw.sigma_ru.transpose() * ups_ru;
    } else {
        ch.h_br.resize(0, layout.t_bar.rows());
        ch.h_ru.resize(1, 0);
    }
    if (!ch.h_bu.allFinite() || !ch.h_br.allFinite() || !ch.h_ru.allFinite())
        throw std::runtime_error("assemble_channels: non-finite channel entry");
    return ch;
}

} // namespace fasaris
