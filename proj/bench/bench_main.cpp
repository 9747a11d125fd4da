// Benchmark: OpenMP kernels against the serial reference path. Each kernel
// must produce bitwise-identical output either way; timings show the speedup.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "gsde/infconv.hpp"
#include "gsde/lattice.hpp"
#include "gsde/par.hpp"
#include "gsde/paths.hpp"

using namespace gsde;

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <class F>
void bench(const char* name, F&& fn) {
    par::set_enabled(false);
    auto t0 = std::chrono::steady_clock::now();
    const auto serial = fn();
    const double t_serial = seconds_since(t0);

    par::set_enabled(true);
    t0 = std::chrono::steady_clock::now();
    const auto parallel = fn();
    const double t_parallel = seconds_since(t0);

    const bool identical = serial == parallel;
    std::printf("%-28s serial %8.3f ms   omp %8.3f ms   speedup %5.2fx   %s\n", name,
                t_serial * 1e3, t_parallel * 1e3,
                t_parallel > 0.0 ? t_serial / t_parallel : 0.0,
                identical ? "bitwise-identical" : "MISMATCH");
    if (!identical) std::exit(1);
}

} // namespace

int main() {
    std::printf("gsde benchmark (%d thread%s available)\n", par::max_threads(),
                par::max_threads() == 1 ? "" : "s");

    const VolatilityBand band{0.5, 1.0};

    bench("lattice backward solve", [&] {
        LatticeParams params;
        params.horizon = 1.0;
        params.n_steps = 2000;
        return solve_gheat([](double x) { return std::fabs(x) + 0.2 * x * x; }, band, params)
            .values.data;
    });

    bench("path simulation", [&] {
        const TimeGrid grid = TimeGrid::uniform(1.0, 256);
        const auto family = bang_bang_family(grid, band, 4);
        return simulate_paths(family, band, 2000, 42).b;
    });

    bench("ito integrals", [&] {
        const TimeGrid grid = TimeGrid::uniform(1.0, 256);
        const auto family = bang_bang_family(grid, band, 3);
        const PathBundle bundle = simulate_paths(family, band, 2000, 42);
        const StepProcess eta =
            adapted_process(bundle, [](double t, double b) { return std::tanh(b) + t; });
        return ito_integral(eta, bundle);
    });

    bench("inf-convolution grid", [&] {
        GrowthBoundedFunction f;
        f.eval = [](std::span<const double> p) {
            return std::cos(4.0 * p[0]) + 0.4 * p[0] * p[0] + 0.3 * std::sin(5.0 * p[1]);
        };
        f.arity = 2;
        f.growth_M = 1.6;
        GridPolicy grid;
        grid.coarse_points = 129;
        InfConvApprox approx{f, 4.0, grid, std::nullopt};
        std::vector<double> out;
        for (double x = -1.0; x <= 1.0; x += 0.25) {
            for (double y = -1.0; y <= 1.0; y += 0.25) {
                const std::array<double, 2> q{x, y};
                out.push_back(inf_convolve(approx, q));
            }
        }
        return out;
    });

    bench("pairwise reduction", [&] {
        std::vector<double> xs(1 << 22);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            xs[i] = std::sin(static_cast<double>(i) * 1e-3);
        }
        std::vector<double> out{par::block_pairwise_sum(xs)};
        return out;
    });

    std::printf("done\n");
    return 0;
}
