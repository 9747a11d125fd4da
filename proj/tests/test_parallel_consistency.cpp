#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "gsde/infconv.hpp"
#include "gsde/par.hpp"
#include "gsde/paths.hpp"
#include "gsde/registry.hpp"
#include "gsde/solver.hpp"

using namespace gsde;

namespace {

/// Runs fn twice, OpenMP kernels off then on, and hands both results to check.
template <class F, class C>
void serial_vs_parallel(F&& fn, C&& check) {
    par::set_enabled(false);
    auto serial = fn();
    par::set_enabled(true);
    auto parallel = fn();
    check(serial, parallel);
    par::set_enabled(true);
}

} // namespace

TEST_CASE("block pairwise sum is schedule independent") {
    std::mt19937_64 gen(123);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<double> xs(100001);
    for (double& x : xs) x = val(gen);
    serial_vs_parallel([&] { return par::block_pairwise_sum(xs); },
                       [](double a, double b) { CHECK(a == b); });
}

TEST_CASE("path simulation is bitwise identical serial vs parallel") {
    const VolatilityBand band{0.5, 1.0};
    const TimeGrid grid = TimeGrid::uniform(1.0, 40);
    const auto family = bang_bang_family(grid, band, 3);
    serial_vs_parallel([&] { return simulate_paths(family, band, 200, 31); },
                       [](const PathBundle& a, const PathBundle& b) {
                           CHECK(a.b == b.b);
                           CHECK(a.qv == b.qv);
                       });
}

TEST_CASE("ito and qv integrals are schedule independent") {
    const VolatilityBand band{0.5, 1.0};
    const TimeGrid grid = TimeGrid::uniform(1.0, 64);
    const auto family = bang_bang_family(grid, band, 2);
    const PathBundle bundle = simulate_paths(family, band, 333, 8);
    const StepProcess eta = adapted_process(bundle, [](double t, double b) { return b - t; });
    serial_vs_parallel(
        [&] {
            return std::make_pair(ito_integral(eta, bundle), qv_integral(eta, bundle));
        },
        [](const auto& a, const auto& b) {
            CHECK(a.first == b.first);
            CHECK(a.second == b.second);
        });
}

TEST_CASE("lattice solve is bitwise identical serial vs parallel") {
    const VolatilityBand band{0.5, 1.0};
    LatticeParams params;
    params.n_steps = 150;
    serial_vs_parallel(
        [&] { return solve_gheat([](double x) { return std::fabs(x); }, band, params); },
        [](const Lattice& a, const Lattice& b) { CHECK(a.values.data == b.values.data); });
}

TEST_CASE("inf-convolution grid search is schedule independent") {
    GrowthBoundedFunction f;
    f.eval = [](std::span<const double> p) {
        return std::cos(3.0 * p[0]) + 0.3 * p[0] * p[0];
    };
    f.arity = 1;
    f.growth_M = 1.4;
    InfConvApprox approx{f, 3.0, GridPolicy{}, std::nullopt};
    serial_vs_parallel(
        [&] {
            std::vector<double> out;
            for (double x = -2.0; x <= 2.0; x += 0.1) {
                const std::array<double, 1> q{x};
                out.push_back(inf_convolve(approx, q));
            }
            return out;
        },
        [](const std::vector<double>& a, const std::vector<double>& b) { CHECK(a == b); });
}

TEST_CASE("full coupled solve is bitwise identical serial vs parallel") {
    const CoupledProblem problem = preset_problem("coupled_tanh");
    SolveConfig cfg;
    cfg.band = VolatilityBand{0.5, 1.0};
    cfg.n_steps = 50;
    cfg.tol = 1e-5;
    serial_vs_parallel(
        [&] { return solve_rfbgsde(problem, cfg); },
        [](const auto& a, const auto& b) {
            CHECK(a.first.x.data == b.first.x.data);
            CHECK(a.first.y.data == b.first.y.data);
            CHECK(a.first.z.data == b.first.z.data);
            CHECK(a.first.da.data == b.first.da.data);
            CHECK(a.second.rows.size() == b.second.rows.size());
        });
}
