#include "fasaris/metrics.hpp"

#include <cmath>

namespace fasaris {

namespace {
constexpr double kFeasTol = 1e-6;  // relative; interior-point outputs sit at boundaries
}

double achieved_sinr(const Channels& ch, const Eigen::VectorXcd& w,
                     const Eigen::VectorXcd& e, double sigma_r_sq,
                     double sigma_u_sq) {
    Eigen::RowVectorXcd effective = ch.h_bu;
    double relay_noise = 0.0;
    if (e.size() > 0) {
        Eigen::RowVectorXcd h_ru_e = ch.h_ru.cwiseProduct(e.transpose());
        effective += h_ru_e * ch.h_br;
        relay_noise = sigma_r_sq * h_ru_e.squaredNorm();
    }
    std::complex<double> s = effective * w;
    return std::norm(s) / (relay_noise + sigma_u_sq);
}

double achievable_rate(const Channels& ch, const Eigen::VectorXcd& w,
                       const Eigen::VectorXcd& e, double sigma_r_sq,
                       double sigma_u_sq) {
    return std::log2(1.0 + achieved_sinr(ch, w, e, sigma_r_sq, sigma_u_sq));
}

double aris_power(const Channels& ch, const Eigen::VectorXcd& w,
                  const Eigen::VectorXcd& e, double sigma_r_sq) {
    if (e.size() == 0) return 0.0;
    Eigen::VectorXcd amplified = (ch.h_br * w).cwiseProduct(e);
    return amplified.squaredNorm() + sigma_r_sq * e.squaredNorm();
}

FeasibilityReport check_feasibility(const Solution& sol, const Channels& ch,
                                    const ScenarioConfig& cfg, ConstraintSet set) {
    FeasibilityReport rep;
    auto flag = [&](const std::string& name, double slack) {
        if (slack < 0.0) {
            rep.ok = false;
            rep.violations.emplace_back(name, slack);
        }
    };

    flag("bs_power", cfg.p0_w * (1.0 + kFeasTol) - sol.w.squaredNorm());

    if (set == ConstraintSet::Active) {
        if (sol.e.size() > 0)
            flag("aris_power",
                 cfg.p1_w * (1.0 + kFeasTol) - aris_power(ch, sol.w, sol.e, cfg.sigma_r_sq));
    } else {
        for (Eigen::Index m = 0; m < sol.e.size(); ++m)
            flag("unit_modulus[" + std::to_string(m) + "]",
                 kFeasTol - std::abs(std::abs(sol.e[m]) - 1.0));
    }

    const auto& t = sol.layout.t_bar;
    for (Eigen::Index n = 0; n < t.rows(); ++n) {
        double margin = cfg.region_half * (1.0 + kFeasTol) -
                        std::max(std::abs(t(n, 0)), std::abs(t(n, 1)));
        flag("region[" + std::to_string(n) + "]", margin);
    }
    for (Eigen::Index n = 0; n < t.rows(); ++n)
        for (Eigen::Index v = n + 1; v < t.rows(); ++v) {
            double d = (t.row(n) - t.row(v)).norm();
            flag("min_dist[" + std::to_string(n) + "," + std::to_string(v) + "]",
                 d - cfg.min_dist * (1.0 - kFeasTol));
        }
    return rep;
}

} // namespace fasaris
