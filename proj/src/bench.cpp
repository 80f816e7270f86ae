#include "fasaris/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fasaris/rng.hpp"

namespace fasaris {

ScenarioConfig apply_parameter(const ScenarioConfig& cfg, const std::string& parameter,
                               double value) {
    ScenarioConfig out = cfg;
    if (parameter == "p0_dbm") out.p0_dbm = value;
    else if (parameter == "aris_x") out.aris_pos.x() = value;
    else if (parameter == "m_elements") out.m_elements = static_cast<int>(value);
    else if (parameter == "n_paths") out.n_paths = static_cast<int>(value);
    else if (parameter == "n_antennas") out.n_antennas = static_cast<int>(value);
    else if (parameter == "region_over_lambda")
        out.region_half = value * cfg.wavelength / 2.0;
    else
        throw std::invalid_argument("unknown sweep parameter '" + parameter + "'");
    out.validate();
    return out;
}

namespace {

int worker_count() {
    if (const char* env = std::getenv("FAS_ARIS_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

} // namespace

// tasks are dispatched by index; collection order does not matter
void parallel_tasks(int count, const std::function<void(int)>& fn) {
    int workers = std::min(worker_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int wkr = 0; wkr < workers; ++wkr)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

SweepResult run_sweep(const SweepSpec& spec, const ScenarioConfig& cfg) {
    if (spec.values.empty()) throw std::invalid_argument("sweep: values empty");
    if (spec.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");

    struct Task {
        double value;
        int trial;
    };
    std::vector<Task> tasks;
    for (double v : spec.values)
        for (int t = 0; t < spec.trials; ++t) tasks.push_back({v, t});

    std::mutex mu;
    SweepResult out;
    parallel_tasks(static_cast<int>(tasks.size()), [&](int ti) {
        const Task& task = tasks[ti];
        std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(task.trial);
        std::vector<ResultRow> local;
        try {
            ScenarioConfig run_cfg = apply_parameter(cfg, spec.parameter, task.value);
            // one draw per (value, trial), shared by every scheme
            ScenarioDraw draw = sample_scenario(run_cfg, seed);
            for (BaselineKind kind : spec.schemes) {
                ResultRow row;
                row.parameter_value = task.value;
                row.scheme = baseline_name(kind);
                row.trial = task.trial;
                row.seed = seed;
                auto t0 = std::chrono::steady_clock::now();
                try {
                    BaselineResult res = run_baseline(kind, draw, run_cfg, seed);
                    ScenarioConfig eff_cfg = run_cfg;
                    eff_cfg.m_elements =
                        static_cast<int>(res.state.solution.e.size());
                    eff_cfg.validate();
                    Channels ch =
                        assemble_channels(draw, res.state.solution.layout, eff_cfg);
                    row.rate_bits = res.state.solution.rate_bits;
                    row.outer_iters = res.state.iter;
                    row.feasible =
                        check_feasibility(res.state.solution, ch, eff_cfg,
                                          res.constraint_set)
                            .ok;
                } catch (const std::exception&) {
                    row.feasible = false;
                }
                row.wall_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
                local.push_back(std::move(row));
            }
        } catch (const std::exception&) {
            // config-level failure: emit infeasible rows for every scheme
            for (BaselineKind kind : spec.schemes) {
                ResultRow row;
                row.parameter_value = task.value;
                row.scheme = baseline_name(kind);
                row.trial = task.trial;
                row.seed = seed;
                local.push_back(std::move(row));
            }
        }
        std::scoped_lock lock(mu);
        for (auto& r : local) out.rows.push_back(std::move(r));
    });

    std::sort(out.rows.begin(), out.rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.parameter_value, a.scheme, a.trial) <
               std::tie(b.parameter_value, b.scheme, b.trial);
    });

    // per-(value, scheme) mean and standard error over feasible rows
    std::map<std::pair<double, std::string>, std::vector<double>> groups;
    for (const auto& r : out.rows)
        if (r.feasible) groups[{r.parameter_value, r.scheme}].push_back(r.rate_bits);
    for (const auto& [key, rates] : groups) {
        SweepSummaryRow s;
        s.parameter_value = key.first;
        s.scheme = key.second;
        s.count = static_cast<int>(rates.size());
        double mean = 0.0;
        for (double r : rates) mean += r;
        mean /= s.count;
        double var = 0.0;
        for (double r : rates) var += (r - mean) * (r - mean);
        s.mean_rate = mean;
        s.stderr_rate =
            s.count > 1 ? std::sqrt(var / (s.count - 1) / s.count) : 0.0;
        out.summary.push_back(std::move(s));
    }
    return out;
}

namespace {

std::string trim_copy(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, sep)) out.push_back(trim_copy(tok));
    return out;
}

} // namespace

SweepSpec parse_sweep_text(const std::string& text) {
    SweepSpec spec;
    spec.values.clear();
    spec.schemes.clear();
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim_copy(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("sweep spec: missing '=' in '" + line + "'");
        std::string key = trim_copy(line.substr(0, eq));
        std::string val = trim_copy(line.substr(eq + 1));
        if (key == "parameter") spec.parameter = val;
        else if (key == "values") {
            for (const auto& tok : split(val, ','))
                if (!tok.empty()) spec.values.push_back(std::stod(tok));
        } else if (key == "schemes") {
            for (const auto& tok : split(val, ',')) {
                auto kind = baseline_from_name(tok);
                if (!kind) throw std::invalid_argument("unknown scheme '" + tok + "'");
                spec.schemes.push_back(*kind);
            }
        } else if (key == "trials") spec.trials = std::stoi(val);
        else if (key == "seed_base") spec.seed_base = std::stoull(val);
        else
            throw std::invalid_argument("unknown sweep key '" + key + "'");
    }
    if (spec.values.empty()) throw std::invalid_argument("sweep spec: no values");
    if (spec.schemes.empty()) spec.schemes.push_back(BaselineKind::Proposed);
    return spec;
}

SweepSpec load_sweep(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open sweep spec '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_sweep_text(ss.str());
}

// ---- CSV ------------------------------------------------------------------

namespace {
std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
} // namespace

std::string rows_to_csv(const std::vector<ResultRow>& rows,
                        const std::vector<std::string>& metadata) {
    std::ostringstream out;
    for (const auto& m : metadata) out << "# " << m << "\n";
    out << "parameter_value,scheme,trial,seed,rate_bits,outer_iters,wall_ms,feasible\n";
    for (const auto& r : rows)
        out << fmt_double(r.parameter_value) << ',' << r.scheme << ',' << r.trial << ','
            << r.seed << ',' << fmt_double(r.rate_bits) << ',' << r.outer_iters << ','
            << fmt_double(r.wall_ms) << ',' << (r.feasible ? 1 : 0) << "\n";
    return out.str();
}

std::vector<ResultRow> rows_from_csv(const std::string& text) {
    std::vector<ResultRow> rows;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        line = trim_copy(line);
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // column order is fixed
            continue;
        }
        auto cols = split(line, ',');
        if (cols.size() != 8)
            throw std::invalid_argument("csv row with " + std::to_string(cols.size()) +
                                        " columns");
        ResultRow r;
        r.parameter_value = std::stod(cols[0]);
        r.scheme = cols[1];
        r.trial = std::stoi(cols[2]);
        r.seed = std::stoull(cols[3]);
        r.rate_bits = std::stod(cols[4]);
        r.outer_iters = std::stoi(cols[5]);
        r.wall_ms = std::stod(cols[6]);
        r.feasible = cols[7] == "1";
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---- SVG --------------------------------------------------------------------

std::string render_line_svg(const std::string& title, const std::string& x_label,
                            const std::string& y_label,
                            const std::vector<PlotSeries>& series) {
    const int width = 720, height = 480;
    const int ml = 70, mr = 160, mt = 40, mb = 55;
    const double plot_w = width - ml - mr, plot_h = height - mt - mb;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double lo = s.y[i] - (i < s.yerr.size() ? s.yerr[i] : 0.0);
            double hi = s.y[i] + (i < s.yerr.size() ? s.yerr[i] : 0.0);
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, lo);
            ymax = std::max(ymax, hi);
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax - xmin < 1e-12) { xmax += 1.0; xmin -= 1.0; }
    double ypad = std::max(1e-12, 0.05 * (ymax - ymin));
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h; };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    // axes with 5 ticks per side
    svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (int i = 0; i <= 5; ++i) {
        double xv = xmin + (xmax - xmin) * i / 5.0;
        double yv = ymin + (ymax - ymin) * i / 5.0;
        svg << "<line x1=\"" << px(xv) << "\" y1=\"" << mt << "\" x2=\"" << px(xv)
            << "\" y2=\"" << mt + plot_h << "\" stroke=\"#ddd\"/>\n";
        svg << "<line x1=\"" << ml << "\" y1=\"" << py(yv) << "\" x2=\"" << ml + plot_w
            << "\" y2=\"" << py(yv) << "\" stroke=\"#ddd\"/>\n";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", xv);
        svg << "<text x=\"" << px(xv) << "\" y=\"" << mt + plot_h + 16
            << "\" text-anchor=\"middle\">" << buf << "</text>\n";
        std::snprintf(buf, sizeof(buf), "%.3g", yv);
        svg << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4
            << "\" text-anchor=\"end\">" << buf << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << x_label << "</text>\n";
    svg << "<text x=\"18\" y=\"" << mt + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << mt + plot_h / 2 << ")\">" << y_label
        << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = colors[si % 6];
        std::ostringstream pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            pts << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\" points=\"" << pts.str() << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
            if (i < s.yerr.size() && s.yerr[i] > 0.0) {
                double x = px(s.x[i]);
                svg << "<line x1=\"" << x << "\" y1=\"" << py(s.y[i] - s.yerr[i])
                    << "\" x2=\"" << x << "\" y2=\"" << py(s.y[i] + s.yerr[i])
                    << "\" stroke=\"" << color << "\" stroke-width=\"1\"/>\n";
                for (double dy : {s.y[i] - s.yerr[i], s.y[i] + s.yerr[i]})
                    svg << "<line x1=\"" << x - 3 << "\" y1=\"" << py(dy) << "\" x2=\""
                        << x + 3 << "\" y2=\"" << py(dy) << "\" stroke=\"" << color
                        << "\" stroke-width=\"1\"/>\n";
            }
        }
        double ly = mt + 18.0 * (si + 1);
        svg << "<line x1=\"" << ml + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\""
            << ml + plot_w + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << ml + plot_w + 40 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

// ---- figures ---------------------------------------------------------------

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << content;
}

std::vector<std::string> default_metadata(std::uint64_t seed_base) {
    return {
        std::string("rng = ") + SplitMix64::kAlgorithmId,
        "seed_base = " + std::to_string(seed_base),
        "random_baseline_positions = optimized",
        "passive_baseline_positions = optimized",
    };
}

std::vector<BaselineKind> all_schemes() {
    return {BaselineKind::Proposed, BaselineKind::Fpa, BaselineKind::Eas,
            BaselineKind::RandomPhase, BaselineKind::Passive};
}

std::vector<std::string> emit_sweep_figure(const std::string& figure_id,
                                           const SweepSpec& spec,
                                           const ScenarioConfig& cfg,
                                           const std::string& out_dir,
                                           const std::string& x_label) {
    SweepResult res = run_sweep(spec, cfg);
    std::string csv_path = out_dir + "/" + figure_id + ".csv";
    write_file(csv_path, rows_to_csv(res.rows, default_metadata(spec.seed_base)));

    std::map<std::string, PlotSeries> by_scheme;
    for (const auto& s : res.summary) {
        PlotSeries& ps = by_scheme[s.scheme];
        ps.label = s.scheme;
        ps.x.push_back(s.parameter_value);
        ps.y.push_back(s.mean_rate);
        ps.yerr.push_back(s.stderr_rate);
    }
    std::vector<PlotSeries> series;
    for (auto& [name, ps] : by_scheme) series.push_back(std::move(ps));
    std::string svg_path = out_dir + "/" + figure_id + ".svg";
    write_file(svg_path, render_line_svg("achievable rate vs " + x_label, x_label,
                                         "rate (bits/s/Hz)", series));
    return {csv_path, svg_path};
}

std::vector<std::string> emit_convergence(const ScenarioConfig& cfg,
                                          const std::string& out_dir, int trials,
                                          std::uint64_t seed_base) {
    std::vector<int> antenna_counts{2, 4, 6};
    std::vector<ResultRow> rows;
    std::map<int, std::vector<std::vector<double>>> traces;  // N -> per-trial trace
    std::mutex mu;

    struct Task {
        int n;
        int trial;
    };
    std::vector<Task> tasks;
    for (int n : antenna_counts)
        for (int t = 0; t < trials; ++t) tasks.push_back({n, t});

    parallel_tasks(static_cast<int>(tasks.size()), [&](int ti) {
        const Task& task = tasks[ti];
        ScenarioConfig run_cfg = apply_parameter(cfg, "n_antennas", task.n);
        std::uint64_t seed = seed_base + static_cast<std::uint64_t>(task.trial);
        ScenarioDraw draw = sample_scenario(run_cfg, seed);
        auto t0 = std::chrono::steady_clock::now();
        AOState st = optimize(draw, run_cfg, seed);
        ResultRow row;
        row.parameter_value = task.n;
        row.scheme = "proposed";
        row.trial = task.trial;
        row.seed = seed;
        row.rate_bits = st.solution.rate_bits;
        row.outer_iters = st.iter;
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        Channels ch = assemble_channels(draw, st.solution.layout, run_cfg);
        row.feasible = check_feasibility(st.solution, ch, run_cfg).ok;
        std::scoped_lock lock(mu);
        rows.push_back(std::move(row));
        traces[task.n].push_back(st.rate_trace);
    });

    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.parameter_value, a.trial) <
               std::tie(b.parameter_value, b.trial);
    });
    std::string csv_path = out_dir + "/convergence.csv";
    write_file(csv_path, rows_to_csv(rows, default_metadata(seed_base)));

    // companion per-iteration file: the ResultRow schema has no room for
    // traces, so they live next door under their own documented header
    std::ostringstream tr;
    tr << "n_antennas,trial,iter,rate_bits\n";
    for (int n : antenna_counts) {
        auto it = traces.find(n);
        if (it == traces.end()) continue;
        for (std::size_t t = 0; t < it->second.size(); ++t)
            for (std::size_t k = 0; k < it->second[t].size(); ++k) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.17g", it->second[t][k]);
                tr << n << ',' << t << ',' << k << ',' << buf << "\n";
            }
    }
    std::string trace_path = out_dir + "/convergence_trace.csv";
    write_file(trace_path, tr.str());

    std::vector<PlotSeries> series;
    for (int n : antenna_counts) {
        auto it = traces.find(n);
        if (it == traces.end()) continue;
        std::size_t longest = 0;
        for (const auto& t : it->second) longest = std::max(longest, t.size());
        PlotSeries ps;
        ps.label = "N = " + std::to_string(n);
        for (std::size_t k = 0; k < longest; ++k) {
            double acc = 0.0;
            int cnt = 0;
            for (const auto& t : it->second) {
                // converged traces hold their final value
                acc += k < t.size() ? t[k] : t.back();
                ++cnt;
            }
            ps.x.push_back(static_cast<double>(k));
            ps.y.push_back(acc / cnt);
            ps.yerr.push_back(0.0);
        }
        series.push_back(std::move(ps));
    }
    std::string svg_path = out_dir + "/convergence.svg";
    write_file(svg_path, render_line_svg("AO convergence", "outer iteration",
                                         "rate (bits/s/Hz)", series));
    return {csv_path, trace_path, svg_path};
}

} // namespace

std::vector<std::string> emit_figure_data(const std::string& figure_id,
                                          const ScenarioConfig& cfg,
                                          const std::string& out_dir, int trials,
                                          std::uint64_t seed_base) {
    std::filesystem::create_directories(out_dir);
    SweepSpec spec;
    spec.trials = trials;
    spec.seed_base = seed_base;
    spec.schemes = all_schemes();
    if (figure_id == "convergence")
        return emit_convergence(cfg, out_dir, trials, seed_base);
    if (figure_id == "p0") {
        spec.parameter = "p0_dbm";
        spec.values = {0, 5, 10, 15, 20, 25};
        return emit_sweep_figure(figure_id, spec, cfg, out_dir, "P0 (dBm)");
    }
    if (figure_id == "aris_x") {
        spec.parameter = "aris_x";
        spec.values = {10, 20, 30, 40, 50, 60, 70, 80, 90};
        return emit_sweep_figure(figure_id, spec, cfg, out_dir, "ARIS x (m)");
    }
    if (figure_id == "m") {
        spec.parameter = "m_elements";
        spec.values = {2, 4, 6, 8, 10};
        return emit_sweep_figure(figure_id, spec, cfg, out_dir, "reflecting elements M");
    }
    if (figure_id == "l") {
        spec.parameter = "n_paths";
        spec.values = {2, 3, 4, 5, 6, 7, 8};
        return emit_sweep_figure(figure_id, spec, cfg, out_dir, "transmission paths L");
    }
    if (figure_id == "n") {
        spec.parameter = "n_antennas";
        spec.values = {2, 3, 4, 5, 6};
        return emit_sweep_figure(figure_id, spec, cfg, out_dir, "antennas N");
    }
    if (figure_id == "range") {
        spec.parameter = "region_over_lambda";
        spec.values = {1, 2, 3, 4};
        return emit_sweep_figure(figure_id, spec, cfg, out_dir,
                                 "movable range A/lambda");
    }
    throw std::invalid_argument("unknown figure id '" + figure_id + "'");
}

bool SelftestReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

} // namespace fasaris
