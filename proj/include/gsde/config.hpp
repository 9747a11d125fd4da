#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "gsde/registry.hpp"

namespace gsde {

/// Plain `key = value` file with '#' comments.
struct KvFile {
    std::map<std::string, std::string> kv;

    static KvFile parse_file(const std::string& path);
    static KvFile parse(std::istream& is, const std::string& origin);

    bool has(const std::string& key) const { return kv.count(key) != 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
};

/// Everything one run needs, fully resolved: band, grids, family, coefficient
/// selections, tolerances, seed. The echo written to the manifest reproduces
/// the run byte-for-byte.
struct ExperimentConfig {
    VolatilityBand band{0.5, 1.0};
    double horizon = 1.0;
    std::size_t steps = 200;
    double x0 = 0.0;
    double width_sigmas = 6.0;
    double stability = 0.5;

    int family_depth = 3;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;

    double tol = 1e-5;
    std::size_t max_outer = 20;
    double slack_multiplier = 10.0;
    double penalty_epsilon = 1e-3;
    int regression_degree = 2;
    std::string backend = "lattice"; // lattice | scenario

    std::string problem_preset; // when set, coefficient strings are ignored
    std::string coef_b = "zero";
    std::string coef_h = "zero";
    std::string coef_sigma = "one";
    std::string coef_f = "zero";
    std::string coef_g = "zero";
    std::string terminal_expr = "x";
    std::string barrier_expr = "-1000000000";
    double barrier_bound = 0.0;
    double growth_M = 1.0;
    double envelope_K = 1.0;
    double coef_b_lip = -1.0; // < 0: undeclared
    double coef_f_lip = -1.0;
    double coef_sigma_lip = 0.0;

    // infconv subcommand inputs
    std::string infconv_f = "x*x";
    double infconv_level = 2.0;
    double infconv_growth = 1.5;
    double infconv_x_lo = -2.0;
    double infconv_x_hi = 2.0;
    std::size_t infconv_points = 81;

    static ExperimentConfig from_kv(const KvFile& file);
    void echo(std::ostream& os) const;

    LatticeParams lattice_params() const;
    CoupledProblem build_problem() const;
    BackwardSpec build_backward() const;
    ForwardSpec build_forward() const;
    SolveConfig build_solve_config() const;
};

} // namespace gsde
