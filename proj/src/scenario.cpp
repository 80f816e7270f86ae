#include "fasaris/scenario.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fasaris {

std::complex<double> SplitMix64::next_cn(double variance) {
    // Box-Muller; u1 in (0,1] so the log is finite.
    double u1 = 1.0 - next_unit();
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double s = std::sqrt(variance * 0.5);
    return {s * r * std::cos(2.0 * std::numbers::pi * u2),
            s * r * std::sin(2.0 * std::numbers::pi * u2)};
}

double convert_dbm(double p_dbm) {
    return std::pow(10.0, p_dbm / 10.0) * 1e-3;
}

double path_loss(double distance, double exponent, const ScenarioConfig& cfg) {
    if (!(distance > 0.0))
        throw std::invalid_argument("path_loss: distance must be positive");
    return cfg.k0_lin * std::pow(distance / cfg.d0, -exponent);
}

void ScenarioConfig::validate() {
    if (n_antennas < 1) throw std::invalid_argument("n_antennas must be >= 1");
    if (m_elements < 0) throw std::invalid_argument("m_elements must be >= 0");
    if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be positive");
    if (!(d0 > 0.0)) throw std::invalid_argument("d0 must be positive");
    if (!(min_dist > 0.0)) throw std::invalid_argument("min_dist must be positive");
    if (rician_iota < 0.0) throw std::invalid_argument("rician_iota must be >= 0");
    if (!(eps1 > 0.0 && eps2 > 0.0 && eps3 > 0.0))
        throw std::invalid_argument("convergence thresholds must be positive");
    if (max_outer_iters < 1 || max_inner_iters < 1)
        throw std::invalid_argument("iteration caps must be >= 1");
    if (!(srcr_eps0 > 0.0)) throw std::invalid_argument("srcr_eps0 must be positive");

    // A feasible non-overlapping grid layout must fit inside S_t.
    int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_antennas))));
    double needed = min_dist * (cols - 1) * std::sqrt(2.0);
    if (2.0 * region_half < needed - 1e-12)
        throw std::invalid_argument("region too small: A must be >= D*(ceil(sqrt(N))-1)*sqrt(2)");

    p0_w = convert_dbm(p0_dbm);
    p1_w = convert_dbm(p1_dbm);
    sigma_r_sq = convert_dbm(sigma_r_dbm);
    sigma_u_sq = convert_dbm(sigma_u_dbm);
    k0_lin = std::pow(10.0, k0_db / 10.0);
    if (!(p0_w > 0.0 && p1_w > 0.0 && sigma_r_sq > 0.0 && sigma_u_sq > 0.0))
        throw std::invalid_argument("powers and noise variances must be positive in watts");
}

namespace {

Eigen::Vector3d parse_vec3(const std::string& v) {
    Eigen::Vector3d out;
    std::string s = v;
    for (char& c : s)
        if (c == ',' || c == '(' || c == ')') c = ' ';
    std::istringstream is(s);
    if (!(is >> out[0] >> out[1] >> out[2]))
        throw std::invalid_argument("expected 3-vector, got '" + v + "'");
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

ScenarioConfig parse_config_text(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": missing '='");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));

        auto as_d = [&] { return std::stod(val); };
        auto as_i = [&] { return std::stoi(val); };
        if (key == "n_antennas") cfg.n_antennas = as_i();
        else if (key == "m_elements") cfg.m_elements = as_i();
        else if (key == "n_paths") cfg.n_paths = as_i();
        else if (key == "wavelength") cfg.wavelength = as_d();
        else if (key == "bs_pos") cfg.bs_pos = parse_vec3(val);
        else if (key == "aris_pos") cfg.aris_pos = parse_vec3(val);
        else if (key == "ue_pos") cfg.ue_pos = parse_vec3(val);
        else if (key == "p0_dbm") cfg.p0_dbm = as_d();
        else if (key == "p1_dbm") cfg.p1_dbm = as_d();
        else if (key == "sigma_r_dbm") cfg.sigma_r_dbm = as_d();
        else if (key == "sigma_u_dbm") cfg.sigma_u_dbm = as_d();
        else if (key == "k0_db") cfg.k0_db = as_d();
        else if (key == "d0") cfg.d0 = as_d();
        else if (key == "alpha_br") cfg.alpha_br = as_d();
        else if (key == "alpha_ru") cfg.alpha_ru = as_d();
        else if (key == "alpha_bu") cfg.alpha_bu = as_d();
        else if (key == "rician_iota") cfg.rician_iota = as_d();
        else if (key == "min_dist") cfg.min_dist = as_d();
        else if (key == "region_half") cfg.region_half = as_d();
        else if (key == "eps1") cfg.eps1 = as_d();
        else if (key == "eps2") cfg.eps2 = as_d();
        else if (key == "eps3") cfg.eps3 = as_d();
        else if (key == "max_outer_iters") cfg.max_outer_iters = as_i();
        else if (key == "max_inner_iters") cfg.max_inner_iters = as_i();
        else if (key == "srcr_eps0") cfg.srcr_eps0 = as_d();
        else
            throw std::invalid_argument("unknown config key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::invalid_argument("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

namespace {

LinkAngles sample_angles(SplitMix64& rng, int L) {
    LinkAngles a;
    a.theta_t.resize(L);
    a.phi_t.resize(L);
    a.theta_r.resize(L);
    a.phi_r.resize(L);
    for (int s = 0; s < L; ++s) a.theta_t[s] = rng.next_uniform(0.0, std::numbers::pi);
    for (int s = 0; s < L; ++s) a.phi_t[s] = rng.next_uniform(0.0, std::numbers::pi);
    for (int k = 0; k < L; ++k) a.theta_r[k] = rng.next_uniform(0.0, std::numbers::pi);
    for (int k = 0; k < L; ++k) a.phi_r[k] = rng.next_uniform(0.0, std::numbers::pi);
    return a;
}

// LoS gain at index 0, NLoS on the rest.
Eigen::VectorXcd sample_rician_gains(SplitMix64& rng, int L, double pl, double iota) {
    Eigen::VectorXcd g(L);
    double v_los = pl * iota / (iota + 1.0);
    double v_nlos = pl / ((iota + 1.0) * (L - 1));
    g[0] = rng.next_cn(v_los);
    for (int b = 1; b < L; ++b) g[b] = rng.next_cn(v_nlos);
    return g;
}

} // namespace

ScenarioDraw sample_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
    const int L = cfg.n_paths;
    if (L < 2)
        throw std::invalid_argument("sample_scenario: BR/RU NLoS variance needs L >= 2");

    SplitMix64 rng(SplitMix64::derive(seed, 0));
    ScenarioDraw d;
    d.seed = seed;
    // Fixed sampling order: angles (BR, BU, RU), then gains (BR, RU, BU).
    d.br = sample_angles(rng, L);
    d.bu = sample_angles(rng, L);
    d.ru = sample_angles(rng, L);

    double pl_br = path_loss(cfg.dist_br(), cfg.alpha_br, cfg);
    double pl_ru = path_loss(cfg.dist_ru(), cfg.alpha_ru, cfg);
    double pl_bu = path_loss(cfg.dist_bu(), cfg.alpha_bu, cfg);

    d.sigma_br = sample_rician_gains(rng, L, pl_br, cfg.rician_iota);
    d.sigma_ru = sample_rician_gains(rng, L, pl_ru, cfg.rician_iota);
    d.sigma_bu.resize(L);
    for (int b = 0; b < L; ++b) d.sigma_bu[b] = rng.next_cn(pl_bu / L);
    return d;
}

namespace {

void hash_bytes(std::uint64_t& h, const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 0x100000001B3ull;
    }
}

void hash_vec(std::uint64_t& h, const Eigen::VectorXd& v) {
    hash_bytes(h, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

void hash_cvec(std::uint64_t& h, const Eigen::VectorXcd& v) {
    hash_bytes(h, v.data(), sizeof(std::complex<double>) * static_cast<std::size_t>(v.size()));
}

} // namespace

std::uint64_t draw_hash(const ScenarioDraw& d) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const LinkAngles* a : {&d.br, &d.bu, &d.ru}) {
        hash_vec(h, a->theta_t);
        hash_vec(h, a->phi_t);
        hash_vec(h, a->theta_r);
        hash_vec(h, a->phi_r);
    }
    hash_cvec(h, d.sigma_br);
    hash_cvec(h, d.sigma_ru);
    hash_cvec(h, d.sigma_bu);
    return h;
}

} // namespace fasaris
