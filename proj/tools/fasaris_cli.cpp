#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fasaris/bench.hpp"
#include "fasaris/rng.hpp"

using namespace fasaris;

namespace {

ScenarioConfig config_from(const std::string& path) {
    if (path.empty()) {
        ScenarioConfig cfg;
        cfg.validate();
        return cfg;
    }
    return load_config(path);
}

int cmd_run(const std::string& config_path, std::uint64_t seed) {
    ScenarioConfig cfg = config_from(config_path);
    ScenarioDraw draw = sample_scenario(cfg, seed);
    AOState st = optimize(draw, cfg, seed);
    Channels ch = assemble_channels(draw, st.solution.layout, cfg);
    bool feasible = check_feasibility(st.solution, ch, cfg).ok;
    std::printf("rate_bits = %.9f\n", st.solution.rate_bits);
    std::printf("outer_iters = %d (converged = %s)\n", st.iter,
                st.converged ? "yes" : "no");
    std::printf("feasible = %s\n", feasible ? "yes" : "no");
    std::printf("rng = %s, seed = %llu\n", SplitMix64::kAlgorithmId,
                static_cast<unsigned long long>(seed));
    std::printf("trace =");
    for (double r : st.rate_trace) std::printf(" %.6f", r);
    std::printf("\n");
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& spec_path,
              const std::string& out_dir) {
    ScenarioConfig cfg = config_from(config_path);
    SweepSpec spec = load_sweep(spec_path);
    SweepResult res = run_sweep(spec, cfg);
    std::filesystem::create_directories(out_dir);
    std::string csv = out_dir + "/sweep.csv";
    std::vector<std::string> meta = {
        std::string("rng = ") + SplitMix64::kAlgorithmId,
        "seed_base = " + std::to_string(spec.seed_base),
        "parameter = " + spec.parameter,
        "random_baseline_positions = optimized",
        "passive_baseline_positions = optimized",
    };
    std::ofstream(csv, std::ios::binary) << rows_to_csv(res.rows, meta);
    std::printf("wrote %s (%zu rows)\n", csv.c_str(), res.rows.size());
    for (const auto& s : res.summary)
        std::printf("%-10s %s=%-8g mean %.4f +- %.4f (n=%d)\n", s.scheme.c_str(),
                    spec.parameter.c_str(), s.parameter_value, s.mean_rate,
                    s.stderr_rate, s.count);
    return 0;
}

int cmd_figure(const std::string& figure_id, const std::string& config_path,
               const std::string& out_dir, int trials, std::uint64_t seed_base) {
    ScenarioConfig cfg = config_from(config_path);
    auto paths = emit_figure_data(figure_id, cfg, out_dir, trials, seed_base);
    for (const auto& p : paths) std::printf("wrote %s\n", p.c_str());
    return 0;
}

int cmd_selftest() {
    SelftestReport rep = selftest();
    for (const auto& c : rep.checks)
        std::printf("[%s] %-36s worst residual %.3e%s%s\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.worst_residual, c.detail.empty() ? "" : "  — ",
                    c.detail.c_str());
    std::printf("%zu checks, %s\n", rep.checks.size(),
                rep.all_pass() ? "all passed" : "FAILURES PRESENT");
    return rep.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FAS-ARIS downlink rate maximization experiments"};
    app.require_subcommand(1);

    std::string config_path, spec_path, out_dir = "out", figure_id;
    std::uint64_t seed = 1, seed_base = 1;
    int trials = 20;

    auto* run = app.add_subcommand("run", "optimize one scenario and print the trace");
    run->add_option("--config", config_path, "scenario config file");
    run->add_option("--seed", seed, "channel realization seed");

    auto* sweep = app.add_subcommand("sweep", "run a sweep spec and emit CSV");
    sweep->add_option("--config", config_path, "scenario config file");
    sweep->add_option("--spec", spec_path, "sweep spec file")->required();
    sweep->add_option("--out", out_dir, "output directory");

    auto* figure = app.add_subcommand("figure", "emit data for a standard figure");
    figure->add_option("id", figure_id,
                       "convergence|p0|aris_x|m|l|n|range")->required();
    figure->add_option("--config", config_path, "scenario config file");
    figure->add_option("--out", out_dir, "output directory");
    figure->add_option("--trials", trials, "Monte Carlo trials per point");
    figure->add_option("--seed-base", seed_base, "first trial seed");

    auto* st = app.add_subcommand("selftest", "run the numerical oracle suite");
    (void)st;

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run")) return cmd_run(config_path, seed);
        if (app.got_subcommand("sweep")) return cmd_sweep(config_path, spec_path, out_dir);
        if (app.got_subcommand("figure"))
            return cmd_figure(figure_id, config_path, out_dir, trials, seed_base);
        if (app.got_subcommand("selftest")) return cmd_selftest();
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
