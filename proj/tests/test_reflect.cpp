#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fasaris/beamform.hpp"
#include "fasaris/metrics.hpp"
#include "fasaris/reflect.hpp"
#include "fasaris/rng.hpp"

using namespace fasaris;

namespace {

struct Fixture {
    ScenarioConfig cfg;
    ScenarioDraw draw;
    AntennaLayout lay;
    Channels ch;
    Eigen::VectorXcd w, e0;
};

Fixture make_fixture(std::uint64_t seed, int m_elements = 4) {
    Fixture f;
    f.cfg.m_elements = m_elements;
    f.cfg.validate();
    f.draw = sample_scenario(f.cfg, seed);
    f.lay = {initial_fa_grid(f.cfg), aris_layout(f.cfg)};
    f.ch = assemble_channels(f.draw, f.lay, f.cfg);

    // random phases, common amplitude filling 90% of the ARIS budget at the
    // equal-power beamformer; then the actual w from the beamforming step
    SplitMix64 rng(seed + 1);
    f.e0.resize(m_elements);
    for (int m = 0; m < m_elements; ++m)
        f.e0[m] = std::polar(1.0, rng.next_uniform(0.0, 2.0 * std::numbers::pi));
    Eigen::VectorXcd w_eq = Eigen::VectorXcd::Ones(f.cfg.n_antennas) *
                            std::sqrt(f.cfg.p0_w / f.cfg.n_antennas);
    double p = aris_power(f.ch, w_eq, f.e0, f.cfg.sigma_r_sq);
    f.e0 *= std::sqrt(0.9 * f.cfg.p1_w / p);
    f.w = optimize_beamforming(f.ch, f.e0, f.cfg);
    return f;
}

Eigen::VectorXcd random_e(SplitMix64& rng, int m, double amp) {
    Eigen::VectorXcd e(m);
    for (int i = 0; i < m; ++i)
        e[i] = std::polar(amp * (0.5 + rng.next_unit()),
                          rng.next_uniform(0.0, 2.0 * std::numbers::pi));
    return e;
}

} // namespace

TEST_CASE("V-matrix identities against the metrics module") {
    SplitMix64 rng(5);
    for (std::uint64_t seed : {2, 3, 4}) {
        Fixture f = make_fixture(seed);
        VMatrices vm = build_v_matrices(f.ch, f.w, f.cfg.sigma_r_sq, f.cfg.sigma_u_sq);
        for (int rep = 0; rep < 5; ++rep) {
            Eigen::VectorXcd e = random_e(rng, f.cfg.m_elements, 200.0);
            Eigen::VectorXcd et = lift_e(e);

            double quad_v = (et.adjoint() * vm.v * et)(0).real() + vm.direct_power;
            Eigen::RowVectorXcd eff =
                f.ch.h_bu + f.ch.h_ru.cwiseProduct(e.transpose()) * f.ch.h_br;
            double expect_v = std::norm((eff * f.w)(0));
            CHECK(quad_v == doctest::Approx(expect_v).epsilon(1e-10));

            double quad_vbar = (et.adjoint() * vm.v_bar * et)(0).real();
            double expect_vbar =
                f.cfg.sigma_r_sq * f.ch.h_ru.cwiseProduct(e.transpose()).squaredNorm() +
                f.cfg.sigma_u_sq;
            CHECK(quad_vbar == doctest::Approx(expect_vbar).epsilon(1e-10));

            double quad_vhat = (et.adjoint() * vm.v_hat * et)(0).real();
            double expect_vhat = aris_power(f.ch, f.w, e, f.cfg.sigma_r_sq);
            CHECK(quad_vhat == doctest::Approx(expect_vhat).epsilon(1e-10));
        }
    }
}

TEST_CASE("srcr cut basics") {
    SplitMix64 rng(9);
    // rank-one previous iterate with vartheta = 1: tight-feasible at itself
    Eigen::VectorXcd e = random_e(rng, 3, 1.0);
    Eigen::MatrixXcd et = lift_e_matrix(e);
    TraceConstraint cut = srcr_cut(et, 1.0);
    double lhs = (cut.a.cwiseProduct(et.conjugate())).sum().real();
    CHECK(std::abs(lhs) < 1e-9 * et.trace().real());

    // vartheta = 0: vacuous for any PSD matrix
    Eigen::MatrixXcd g(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = rng.next_cn(1.0);
    Eigen::MatrixXcd psd = g * g.adjoint();
    TraceConstraint cut0 = srcr_cut(psd, 0.0);
    CHECK((cut0.a.cwiseProduct(psd.conjugate())).sum().real() >= -1e-12);
}

TEST_CASE("srcr top eigenvector matches power iteration") {
    SplitMix64 rng(11);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::MatrixXcd g(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) g(i, j) = rng.next_cn(1.0);
        Eigen::MatrixXcd psd = g * g.adjoint();
        TraceConstraint cut = srcr_cut(psd, 0.0);
        // recover u u^H from the cut matrix at vartheta = 0
        Eigen::MatrixXcd uu = cut.a;

        Eigen::VectorXcd x = Eigen::VectorXcd::Ones(5).normalized();
        for (int it = 0; it < 3000; ++it) x = (psd * x).normalized();
        Eigen::MatrixXcd uu_pi = x * x.adjoint();
        CHECK((uu - uu_pi).norm() < 1e-8);
    }
}

TEST_CASE("vartheta update") {
    SplitMix64 rng(13);
    Eigen::VectorXcd e = random_e(rng, 3, 1.0);
    CHECK(update_vartheta(lift_e_matrix(e), 0.0) == doctest::Approx(1.0));
    CHECK(update_vartheta(lift_e_matrix(e), 0.3) == doctest::Approx(1.0));

    CHECK(update_vartheta(Eigen::MatrixXcd::Identity(2, 2), 0.1) ==
          doctest::Approx(0.6));

    Eigen::MatrixXcd g(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = rng.next_cn(1.0);
    Eigen::MatrixXcd psd = g * g.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(psd, Eigen::EigenvaluesOnly);
    double expect =
        std::min(1.0, es.eigenvalues().maxCoeff() / psd.trace().real() + 0.05);
    CHECK(update_vartheta(psd, 0.05) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("bilinear majorant touches and dominates") {
    CHECK(bilinear_majorant(0.0, 0.0, 0.0, 0.0) == 0.0);

    SplitMix64 rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        double cp = rng.next_uniform(0.0, 5.0), rp = rng.next_uniform(0.0, 5.0);
        // touching condition at the expansion point
        CHECK(bilinear_majorant(cp, rp, cp, rp) ==
              doctest::Approx(cp * rp).epsilon(1e-12));
        for (int s = 0; s < 50; ++s) {
            double c = rng.next_uniform(0.0, 5.0), r = rng.next_uniform(0.0, 5.0);
            CHECK(bilinear_majorant(c, r, cp, rp) >= c * r - 1e-9);
        }
    }
}

TEST_CASE("reflection optimizer improves the rate and drives rank one") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Fixture f = make_fixture(600 + seed);
        double r0 =
            achievable_rate(f.ch, f.w, f.e0, f.cfg.sigma_r_sq, f.cfg.sigma_u_sq);
        ReflectResult res = optimize_reflection(f.ch, f.w, f.cfg, f.e0);
        double r1 =
            achievable_rate(f.ch, f.w, res.e, f.cfg.sigma_r_sq, f.cfg.sigma_u_sq);
        CHECK(r1 >= r0 - 1e-12);
        CHECK(res.rank_quality >= 0.999);

        // constraint invariants on the accepted matrix and extracted vector
        CHECK(aris_power(f.ch, f.w, res.e, f.cfg.sigma_r_sq) <=
              f.cfg.p1_w * (1.0 + 1e-6));
        CHECK(std::abs(res.e_tilde_final(f.cfg.m_elements, f.cfg.m_elements).real() -
                       1.0) < 1e-6);
        for (int i = 0; i < f.cfg.m_elements; ++i) CHECK(std::abs(res.e[i]) > 0.0);

        // vartheta non-decreasing across successful iterations
        for (std::size_t i = 1; i < res.vartheta_trace.size(); ++i)
            CHECK(res.vartheta_trace[i] >= res.vartheta_trace[i - 1] - 1e-12);

        // auxiliary-variable consistency at high rank quality
        double sinr =
            achieved_sinr(f.ch, f.w, res.e, f.cfg.sigma_r_sq, f.cfg.sigma_u_sq);
        CHECK(res.chi_final == doctest::Approx(sinr).epsilon(5e-3));

        // lifted fractional objective consistent with the extracted solution
        VMatrices vm = build_v_matrices(f.ch, f.w, f.cfg.sigma_r_sq, f.cfg.sigma_u_sq);
        Eigen::MatrixXcd et = lift_e_matrix(res.e);
        double frac_lift =
            ((vm.v.cwiseProduct(res.e_tilde_final.conjugate())).sum().real() +
             vm.direct_power) /
            (vm.v_bar.cwiseProduct(res.e_tilde_final.conjugate())).sum().real();
        double frac_ext =
            ((vm.v.cwiseProduct(et.conjugate())).sum().real() + vm.direct_power) /
            (vm.v_bar.cwiseProduct(et.conjugate())).sum().real();
        CHECK(frac_ext == doctest::Approx(frac_lift).epsilon(1e-2));
    }
}

TEST_CASE("M=1 optimizer matches the amplitude-phase grid") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        Fixture f = make_fixture(700 + seed, 1);
        ReflectResult res = optimize_reflection(f.ch, f.w, f.cfg, f.e0);
        double r_alg =
            achievable_rate(f.ch, f.w, res.e, f.cfg.sigma_r_sq, f.cfg.sigma_u_sq);

        double hw2 = std::norm((f.ch.h_br * f.w)(0));
        double beta_max = std::sqrt(f.cfg.p1_w / (hw2 + f.cfg.sigma_r_sq));
        double best = 0.0;
        for (int bi = 1; bi <= 400; ++bi)
            for (int ti = 0; ti < 400; ++ti) {
                double beta = beta_max * bi / 400.0;
                double th = 2.0 * std::numbers::pi * ti / 400.0;
                Eigen::VectorXcd e(1);
                e[0] = std::polar(beta, th);
                best = std::max(best, achievable_rate(f.ch, f.w, e, f.cfg.sigma_r_sq,
                                                      f.cfg.sigma_u_sq));
            }
        CHECK(std::abs(r_alg - best) <= 1e-3);
    }
}

TEST_CASE("rerun from the optimum makes no further progress") {
    Fixture f = make_fixture(800);
    ReflectResult first = optimize_reflection(f.ch, f.w, f.cfg, f.e0);
    ReflectResult second = optimize_reflection(f.ch, f.w, f.cfg, first.e);
    double r1 = achievable_rate(f.ch, f.w, first.e, f.cfg.sigma_r_sq, f.cfg.sigma_u_sq);
    double r2 = achievable_rate(f.ch, f.w, second.e, f.cfg.sigma_r_sq, f.cfg.sigma_u_sq);
    CHECK(r2 >= r1 - 1e-12);
    CHECK(r2 - r1 < 10 * f.cfg.eps2);
}

TEST_CASE("passive mode pins unit amplitudes") {
    Fixture f = make_fixture(900);
    Eigen::VectorXcd e_init = f.e0;
    for (int i = 0; i < e_init.size(); ++i) e_init[i] /= std::abs(e_init[i]);
    ReflectOptions opts;
    opts.passive = true;
    ReflectResult res = optimize_reflection(f.ch, f.w, f.cfg, e_init, opts);
    for (int i = 0; i < res.e.size(); ++i)
        CHECK(std::abs(res.e[i]) == doctest::Approx(1.0).epsilon(1e-6));
    double r0 = achievable_rate(f.ch, f.w, e_init, f.cfg.sigma_r_sq, f.cfg.sigma_u_sq);
    double r1 = achievable_rate(f.ch, f.w, res.e, f.cfg.sigma_r_sq, f.cfg.sigma_u_sq);
    CHECK(r1 >= r0 - 1e-12);
}
