#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fasaris/bench.hpp"

using namespace fasaris;

namespace {
ScenarioConfig default_cfg() {
    ScenarioConfig cfg;
    cfg.validate();
    return cfg;
}
} // namespace

TEST_CASE("apply_parameter") {
    ScenarioConfig cfg = default_cfg();
    CHECK(apply_parameter(cfg, "p0_dbm", 15.0).p0_w == doctest::Approx(convert_dbm(15.0)));
    CHECK(apply_parameter(cfg, "aris_x", 50.0).aris_pos.x() == 50.0);
    CHECK(apply_parameter(cfg, "m_elements", 8).m_elements == 8);
    CHECK(apply_parameter(cfg, "region_over_lambda", 3.0).region_half ==
          doctest::Approx(3.0 * cfg.wavelength / 2.0));
    CHECK_THROWS(apply_parameter(cfg, "nope", 1.0));
}

TEST_CASE("sweep spec parsing") {
    SweepSpec spec = parse_sweep_text(
        "parameter = n_antennas\n"
        "values = 2, 4, 6\n"
        "schemes = proposed, fpa\n"
        "trials = 3\n"
        "seed_base = 42\n");
    CHECK(spec.parameter == "n_antennas");
    CHECK(spec.values == std::vector<double>{2, 4, 6});
    REQUIRE(spec.schemes.size() == 2);
    CHECK(spec.schemes[0] == BaselineKind::Proposed);
    CHECK(spec.trials == 3);
    CHECK(spec.seed_base == 42);

    CHECK_THROWS(parse_sweep_text("values = 1\nschemes = alien\n"));
    CHECK_THROWS(parse_sweep_text("parameter = p0_dbm\n"));  // no values
}

TEST_CASE("csv round-trips exactly") {
    std::vector<ResultRow> rows;
    ResultRow r;
    r.parameter_value = 0.1 + 0.2;  // not representable nicely
    r.scheme = "proposed";
    r.trial = 3;
    r.seed = 1234567890123ull;
    r.rate_bits = 5.123456789012345678;
    r.outer_iters = 7;
    r.wall_ms = 123.456789;
    r.feasible = true;
    rows.push_back(r);
    r.scheme = "fpa";
    r.rate_bits = 1e-17;
    r.feasible = false;
    rows.push_back(r);

    std::string csv = rows_to_csv(rows, {"rng = test", "note"});
    std::vector<ResultRow> back = rows_from_csv(csv);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].parameter_value == rows[i].parameter_value);
        CHECK(back[i].scheme == rows[i].scheme);
        CHECK(back[i].trial == rows[i].trial);
        CHECK(back[i].seed == rows[i].seed);
        CHECK(back[i].rate_bits == rows[i].rate_bits);
        CHECK(back[i].outer_iters == rows[i].outer_iters);
        CHECK(back[i].wall_ms == rows[i].wall_ms);
        CHECK(back[i].feasible == rows[i].feasible);
    }
}

TEST_CASE("paired draws and reproducibility") {
    ScenarioConfig cfg = default_cfg();
    SweepSpec spec;
    spec.parameter = "p0_dbm";
    spec.values = {20.0};
    spec.schemes = {BaselineKind::Proposed, BaselineKind::Fpa};
    spec.trials = 1;
    spec.seed_base = 5;

    SweepResult a = run_sweep(spec, cfg);
    REQUIRE(a.rows.size() == 2);
    // both schemes consumed the same seed (paired-draw contract)
    CHECK(a.rows[0].seed == a.rows[1].seed);
    CHECK(draw_hash(sample_scenario(cfg, a.rows[0].seed)) ==
          draw_hash(sample_scenario(cfg, a.rows[1].seed)));
    CHECK(a.rows[0].feasible);
    CHECK(a.rows[1].feasible);

    // bit-for-bit reproducible CSV (timings excluded: zero them)
    SweepResult b = run_sweep(spec, cfg);
    for (auto* res : {&a, &b})
        for (auto& row : res->rows) row.wall_ms = 0.0;
    CHECK(rows_to_csv(a.rows) == rows_to_csv(b.rows));
}

TEST_CASE("svg renderer emits a self-contained document") {
    PlotSeries s;
    s.label = "demo";
    s.x = {0, 1, 2};
    s.y = {1.0, 2.0, 1.5};
    s.yerr = {0.1, 0.2, 0.1};
    std::string svg = render_line_svg("t", "x", "y", {s});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("href") == std::string::npos);  // no external assets
}

TEST_CASE("figure emission writes csv and svg") {
    ScenarioConfig cfg = default_cfg();
    std::string dir = "test_fig_out";
    // tiny: one trial, proposed only comes from the convergence preset
    auto paths = emit_figure_data("convergence", cfg, dir, 1, 7);
    REQUIRE(paths.size() == 3);
    for (const auto& p : paths) CHECK(std::filesystem::exists(p));

    std::ifstream f(paths[0]);
    std::stringstream ss;
    ss << f.rdbuf();
    auto rows = rows_from_csv(ss.str());
    CHECK(rows.size() == 3);  // N in {2, 4, 6}, one trial each
    for (const auto& r : rows) CHECK(r.feasible);
    std::filesystem::remove_all(dir);
}

TEST_CASE("selftest passes and the negative control fails") {
    SelftestReport rep = selftest();
    CHECK(rep.checks.size() >= 12);
    for (const auto& c : rep.checks) {
        INFO(c.name, " residual ", c.worst_residual);
        CHECK(c.pass);
    }

    SelftestReport bad = selftest(1e-3);
    bool fd_failed = false;
    for (const auto& c : bad.checks)
        if (c.name == "fd_gradient" && !c.pass) fd_failed = true;
    CHECK(fd_failed);
}
