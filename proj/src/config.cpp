#include "gsde/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gsde/errors.hpp"
#include "gsde/expr.hpp"

namespace gsde {

namespace {
std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}
} // namespace

KvFile KvFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path);
}

KvFile KvFile::parse(std::istream& is, const std::string& origin) {
    KvFile file;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        }
        file.kv[key] = value;
    }
    return file;
}

std::string KvFile::get_string(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double KvFile::get_double(const std::string& key, double fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not a number: '" + it->second + "'");
    }
}

std::uint64_t KvFile::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not an unsigned integer: '" +
                          it->second + "'");
    }
}

std::size_t KvFile::get_size(const std::string& key, std::size_t fallback) const {
    return static_cast<std::size_t>(get_u64(key, fallback));
}

ExperimentConfig ExperimentConfig::from_kv(const KvFile& file) {
    ExperimentConfig c;
    c.band.sigma_lo = file.get_double("band.sigma_lo", c.band.sigma_lo);
    c.band.sigma_hi = file.get_double("band.sigma_hi", c.band.sigma_hi);
    c.horizon = file.get_double("grid.T", c.horizon);
    c.steps = file.get_size("grid.steps", c.steps);
    c.x0 = file.get_double("problem.x0", c.x0);
    c.width_sigmas = file.get_double("lattice.width_sigmas", c.width_sigmas);
    c.stability = file.get_double("lattice.stability", c.stability);
    c.family_depth = static_cast<int>(file.get_u64("family.depth", c.family_depth));
    c.samples = file.get_size("family.samples", c.samples);
    c.seed = file.get_u64("seed", c.seed);
    c.tol = file.get_double("tol", c.tol);
    c.max_outer = file.get_size("max_outer", c.max_outer);
    c.slack_multiplier = file.get_double("slack_multiplier", c.slack_multiplier);
    c.penalty_epsilon = file.get_double("penalty.epsilon", c.penalty_epsilon);
    c.regression_degree = static_cast<int>(file.get_u64("penalty.degree", c.regression_degree));
    c.backend = file.get_string("backend", c.backend);
    c.problem_preset = file.get_string("problem", c.problem_preset);
    c.coef_b = file.get_string("coef.b", c.coef_b);
    c.coef_h = file.get_string("coef.h", c.coef_h);
    c.coef_sigma = file.get_string("coef.sigma", c.coef_sigma);
    c.coef_f = file.get_string("coef.f", c.coef_f);
    c.coef_g = file.get_string("coef.g", c.coef_g);
    c.terminal_expr = file.get_string("terminal", c.terminal_expr);
    c.barrier_expr = file.get_string("barrier", c.barrier_expr);
    c.barrier_bound = file.get_double("barrier.bound", c.barrier_bound);
    c.growth_M = file.get_double("growth.M", c.growth_M);
    c.envelope_K = file.get_double("growth.K", c.envelope_K);
    c.coef_b_lip = file.get_double("coef.b.lipschitz", c.coef_b_lip);
    c.coef_f_lip = file.get_double("coef.f.lipschitz", c.coef_f_lip);
    c.coef_sigma_lip = file.get_double("coef.sigma.lipschitz", c.coef_sigma_lip);
    c.infconv_f = file.get_string("infconv.f", c.infconv_f);
    c.infconv_level = file.get_double("infconv.level", c.infconv_level);
    c.infconv_growth = file.get_double("infconv.growth", c.infconv_growth);
    c.infconv_x_lo = file.get_double("infconv.x_lo", c.infconv_x_lo);
    c.infconv_x_hi = file.get_double("infconv.x_hi", c.infconv_x_hi);
    c.infconv_points = file.get_size("infconv.points", c.infconv_points);

    if (c.backend != "lattice" && c.backend != "scenario") {
        throw ConfigError("backend must be 'lattice' or 'scenario', got '" + c.backend + "'");
    }
    c.band.validate();
    if (!c.problem_preset.empty()) {
        preset_problem(c.problem_preset); // fail fast on unknown names
    }
    return c;
}

void ExperimentConfig::echo(std::ostream& os) const {
    char buf[256];
    auto num = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%s = %.17g\n", key, v);
        os << buf;
    };
    auto str = [&](const char* key, const std::string& v) { os << key << " = " << v << "\n"; };
    num("band.sigma_lo", band.sigma_lo);
    num("band.sigma_hi", band.sigma_hi);
    num("grid.T", horizon);
    num("grid.steps", static_cast<double>(steps));
    num("problem.x0", x0);
    num("lattice.width_sigmas", width_sigmas);
    num("lattice.stability", stability);
    num("family.depth", family_depth);
    num("family.samples", static_cast<double>(samples));
    os << "seed = " << seed << "\n";
    num("tol", tol);
    num("max_outer", static_cast<double>(max_outer));
    num("slack_multiplier", slack_multiplier);
    num("penalty.epsilon", penalty_epsilon);
    num("penalty.degree", regression_degree);
    str("backend", backend);
    if (!problem_preset.empty()) str("problem", problem_preset);
    str("coef.b", coef_b);
    str("coef.h", coef_h);
    str("coef.sigma", coef_sigma);
    str("coef.f", coef_f);
    str("coef.g", coef_g);
    str("terminal", terminal_expr);
    str("barrier", barrier_expr);
    num("barrier.bound", barrier_bound);
    num("growth.M", growth_M);
    num("growth.K", envelope_K);
    num("coef.b.lipschitz", coef_b_lip);
    num("coef.f.lipschitz", coef_f_lip);
    num("coef.sigma.lipschitz", coef_sigma_lip);
    str("infconv.f", infconv_f);
    num("infconv.level", infconv_level);
    num("infconv.growth", infconv_growth);
    num("infconv.x_lo", infconv_x_lo);
    num("infconv.x_hi", infconv_x_hi);
    num("infconv.points", static_cast<double>(infconv_points));
}

LatticeParams ExperimentConfig::lattice_params() const {
    LatticeParams p;
    p.horizon = horizon;
    p.n_steps = steps;
    p.x0 = x0;
    p.width_sigmas = width_sigmas;
    p.stability = stability;
    return p;
}

CoupledProblem ExperimentConfig::build_problem() const {
    if (!problem_preset.empty()) {
        CoupledProblem p = preset_problem(problem_preset);
        p.horizon = horizon;
        return p;
    }
    CoupledProblem p;
    p.x0 = x0;
    p.horizon = horizon;
    p.b = make_coef_txy(coef_b, growth_M,
                        coef_b_lip >= 0.0 ? std::optional<double>(coef_b_lip) : std::nullopt);
    p.h = make_coef_txy(coef_h, growth_M, std::nullopt);
    p.sigma = make_coef_tx(coef_sigma, growth_M, coef_sigma_lip);
    p.f = make_coef4(coef_f, growth_M,
                     coef_f_lip >= 0.0 ? std::optional<double>(coef_f_lip) : std::nullopt);
    p.g = make_coef4(coef_g, growth_M, std::nullopt);
    const Expr term = Expr::parse(terminal_expr);
    p.terminal = [term](double x) { return term.eval(0.0, x, 0.0, 0.0); };
    const Expr barr = Expr::parse(barrier_expr);
    p.barrier = [barr](double t, double x) { return barr.eval(t, x, 0.0, 0.0); };
    p.barrier_bound = barrier_bound;
    p.growth_M = growth_M;
    p.envelope_K = envelope_K;
    return p;
}

BackwardSpec ExperimentConfig::build_backward() const {
    const CoupledProblem p = build_problem();
    BackwardSpec spec;
    spec.terminal = p.terminal;
    spec.barrier = p.barrier;
    spec.barrier_bound = p.barrier_bound;
    spec.growth_K = p.envelope_K;
    spec.driver_f = p.f;
    spec.driver_g = p.g;
    return spec;
}

ForwardSpec ExperimentConfig::build_forward() const {
    const CoupledProblem p = build_problem();
    ForwardSpec spec;
    spec.x0 = p.x0;
    spec.b = p.b;
    spec.h = p.h;
    spec.sigma = p.sigma;
    return spec;
}

SolveConfig ExperimentConfig::build_solve_config() const {
    SolveConfig cfg;
    cfg.band = band;
    cfg.n_steps = steps;
    cfg.width_sigmas = width_sigmas;
    cfg.stability = stability;
    cfg.tol = tol;
    cfg.max_outer = max_outer;
    cfg.slack_multiplier = slack_multiplier;
    return cfg;
}

} // namespace gsde
