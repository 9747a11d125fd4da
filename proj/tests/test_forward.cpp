#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gsde/errors.hpp"
#include "gsde/forward.hpp"
#include "gsde/par.hpp"

using namespace gsde;

namespace {

const VolatilityBand kBand{0.5, 1.0};

PathBundle small_bundle(std::size_t steps, std::size_t samples, int depth = 2,
                        std::uint64_t seed = 11) {
    const TimeGrid grid = TimeGrid::uniform(1.0, steps);
    return simulate_paths(bang_bang_family(grid, kBand, depth), kBand, samples, seed);
}

ForwardSpec drift_only(double (*b)(double, double, double), double growth, double lip) {
    ForwardSpec spec;
    spec.x0 = 1.0;
    spec.b.fn = b;
    spec.b.growth_M = growth;
    spec.b.lipschitz = lip;
    spec.b.uses_y = false;
    spec.h = zero_coef_txy();
    spec.sigma = constant_sigma(0.0);
    return spec;
}

} // namespace

TEST_CASE("constant drift: X_t = x + t up to roundoff") {
    const PathBundle bundle = small_bundle(40, 3);
    ForwardSpec spec = drift_only([](double, double, double) { return 1.0; }, 1.0, 0.0);
    const GridProcess x = euler_forward(spec, bundle);
    for (std::size_t s = 0; s < x.n_scenarios; ++s) {
        for (std::size_t i = 0; i < x.n_samples; ++i) {
            for (std::size_t k = 0; k <= 40; ++k) {
                CHECK(x.at(s, i, k) ==
                      doctest::Approx(1.0 + bundle.grid.time(k)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("h = 1: X follows x + <B> exactly, family max hits sigma_hi^2 T") {
    const PathBundle bundle = small_bundle(32, 4, 3);
    ForwardSpec spec;
    spec.x0 = 1.0;
    spec.b = zero_coef_txy();
    spec.h.fn = [](double, double, double) { return 1.0; };
    spec.h.growth_M = 1.0;
    spec.h.lipschitz = 0.0;
    spec.h.uses_y = false;
    spec.sigma = constant_sigma(0.0);
    const GridProcess x = euler_forward(spec, bundle);
    for (std::size_t s = 0; s < x.n_scenarios; ++s) {
        for (std::size_t i = 0; i < x.n_samples; ++i) {
            for (std::size_t k = 0; k <= 32; ++k) {
                CHECK(x.at(s, i, k) ==
                      doctest::Approx(1.0 + bundle.qv_at(s, i, k)).epsilon(1e-12));
            }
        }
    }
    // root sublinear expectation of X_T: max over scenarios of the mean
    double family_max = -1e18;
    for (std::size_t s = 0; s < x.n_scenarios; ++s) {
        std::vector<double> terminal(x.n_samples);
        for (std::size_t i = 0; i < x.n_samples; ++i) terminal[i] = x.at(s, i, 32);
        family_max = std::max(family_max, par::mean(terminal));
    }
    CHECK(family_max == doctest::Approx(1.0 + kBand.hi2() * 1.0).epsilon(1e-12));
}

TEST_CASE("linear decay drift matches the ODE oracle within O(dt)") {
    const PathBundle bundle = small_bundle(100, 2);
    ForwardSpec spec = drift_only([](double, double x, double) { return -x; }, 2.0, 1.0);
    const GridProcess x = euler_forward(spec, bundle);
    const double oracle = std::exp(-1.0);
    const double dt = bundle.grid.dt(0);
    for (std::size_t s = 0; s < x.n_scenarios; ++s) {
        for (std::size_t i = 0; i < x.n_samples; ++i) {
            CHECK(std::fabs(x.at(s, i, 100) - oracle) < dt);
        }
    }
}

TEST_CASE("y-dependent drift without a driving process is rejected") {
    const PathBundle bundle = small_bundle(8, 2);
    ForwardSpec spec;
    spec.x0 = 0.0;
    spec.b.fn = [](double, double, double y) { return y; };
    spec.b.growth_M = 1.0;
    spec.b.uses_y = true;
    spec.h = zero_coef_txy();
    spec.sigma = constant_sigma(0.0);
    CHECK_THROWS_AS(euler_forward(spec, bundle), ConfigError);

    GridProcess misaligned(1, 1, 3);
    CHECK_THROWS_AS(euler_forward(spec, bundle, &misaligned), ConfigError);
}

TEST_CASE("non-finite values abort with the step index") {
    const PathBundle bundle = small_bundle(10, 1, 1);
    ForwardSpec spec = drift_only([](double, double x, double) { return x * x * x; }, 1.0, 0.0);
    spec.x0 = 50.0; // cubic blowup overflows quickly
    try {
        euler_forward(spec, bundle);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("comparison: ordered drifts give ordered solutions") {
    const PathBundle bundle = small_bundle(50, 20);
    ForwardSpec lo = drift_only([](double, double x, double) { return -0.4 * x - 0.3; }, 1.0, 0.4);
    ForwardSpec hi = drift_only([](double, double x, double) { return -0.4 * x + 0.3; }, 1.0, 0.4);
    const GridProcess xlo = euler_forward(lo, bundle);
    const GridProcess xhi = euler_forward(hi, bundle);
    double max_x = std::max(par::max_abs(xlo.v), par::max_abs(xhi.v));
    const double slack = 10.0 * bundle.grid.dt(0) * (1.0 + max_x);
    for (std::size_t idx = 0; idx < xlo.v.size(); ++idx) {
        CHECK(xlo.v[idx] <= xhi.v[idx] + slack);
    }
}

TEST_CASE("growth containment: Gronwall bound dominates the realized paths") {
    const PathBundle bundle = small_bundle(64, 50);
    ForwardSpec spec;
    spec.x0 = 0.5;
    spec.b.fn = [](double, double x, double) { return 0.5 * std::tanh(x) + 0.2; };
    spec.b.growth_M = 0.7;
    spec.b.lipschitz = 0.5;
    spec.b.uses_y = false;
    spec.h = zero_coef_txy();
    spec.sigma = constant_sigma(1.0);
    spec.sigma.growth_M = 1.0;
    const GridProcess x = euler_forward(spec, bundle);
    const std::vector<double> bound = gronwall_bound(spec, bundle);
    for (std::size_t s = 0; s < x.n_scenarios; ++s) {
        for (std::size_t i = 0; i < x.n_samples; ++i) {
            double sup = 0.0;
            for (std::size_t k = 0; k <= 64; ++k) {
                sup = std::max(sup, std::fabs(x.at(s, i, k)));
            }
            CHECK(sup <= bound[s * x.n_samples + i] + 1e-9);
        }
    }
}

TEST_CASE("ladder short-circuits for Lipschitz drift") {
    const PathBundle bundle = small_bundle(20, 4);
    ForwardSpec spec = drift_only([](double, double x, double) { return -0.5 * x; }, 1.0, 0.5);
    LadderConfig ladder;
    auto [x, report] = solve_forward_monotone(spec, bundle, ladder);
    CHECK(report.converged);
    CHECK(report.levels_used == 1);
    const GridProcess direct = euler_forward(spec, bundle);
    CHECK(x.v == direct.v);
}

TEST_CASE("arctan drift ladder converges within 5 levels at 1e-6") {
    const TimeGrid grid = TimeGrid::uniform(1.0, 100);
    const PathBundle bundle =
        simulate_paths(bang_bang_family(grid, kBand, 2), kBand, 10, 21);
    GridProcess y(bundle.n_scenarios(), bundle.n_samples, bundle.path_len());
    for (std::size_t s = 0; s < y.n_scenarios; ++s) {
        for (std::size_t i = 0; i < y.n_samples; ++i) {
            for (std::size_t k = 0; k <= 100; ++k) {
                y.at(s, i, k) = bundle.b_at(s, i, k); // any adapted driver works here
            }
        }
    }
    ForwardSpec spec;
    spec.x0 = 0.0;
    spec.b.fn = [](double, double, double yv) { return std::atan(yv); };
    spec.b.growth_M = 1.0;
    spec.b.lipschitz = 1.0; // arctan is 1-Lipschitz
    spec.b.uses_y = true;
    spec.h = zero_coef_txy();
    spec.sigma = constant_sigma(1.0);
    LadderConfig ladder;
    ladder.tol = 1e-6;
    ladder.max_levels = 5;
    auto [x, report] = solve_forward_monotone(spec, bundle, ladder, &y);
    CHECK(report.converged);
    CHECK(report.levels_used <= 5);
    // limit agrees with direct Euler using the exact coefficient
    const GridProcess direct = euler_forward(spec, bundle, &y);
    for (std::size_t idx = 0; idx < x.v.size(); ++idx) {
        CHECK(x.v[idx] == doctest::Approx(direct.v[idx]).epsilon(1e-6));
    }
}

TEST_CASE("zero coefficients keep X constant at every ladder level") {
    const PathBundle bundle = small_bundle(16, 3);
    ForwardSpec spec;
    spec.x0 = 2.5;
    spec.b = zero_coef_txy();
    spec.h = zero_coef_txy();
    spec.sigma = constant_sigma(0.0);
    auto [x, report] = solve_forward_monotone(spec, bundle, LadderConfig{});
    for (double v : x.v) CHECK(v == 2.5);
    CHECK(report.converged);
}

TEST_CASE("genuinely non-Lipschitz drift: ladder approaches the exact solve") {
    // b(x) = -sqrt(|x|) is continuous, non-Lipschitz at 0.
    const TimeGrid grid = TimeGrid::uniform(0.5, 20);
    const PathBundle bundle =
        simulate_paths(bang_bang_family(grid, kBand, 1), kBand, 6, 5);
    ForwardSpec spec;
    spec.x0 = 1.0;
    spec.b.fn = [](double, double x, double) { return -std::sqrt(std::fabs(x)); };
    spec.b.growth_M = 1.0;
    spec.b.uses_y = false;
    spec.h = zero_coef_txy();
    spec.sigma = constant_sigma(0.0);
    LadderConfig ladder;
    ladder.max_levels = 7;
    ladder.tol = 1e-4;
    ladder.grid.coarse_points = 129;
    auto [x, report] = solve_forward_monotone(spec, bundle, ladder);
    CHECK(report.converged);
    for (std::size_t l = 0; l + 1 < report.deltas.size(); ++l) {
        CHECK(report.mono_violations[l] <= 1e-9);
    }
    const GridProcess exact = euler_forward(spec, bundle);
    for (std::size_t idx = 0; idx < x.v.size(); ++idx) {
        CHECK(std::fabs(x.v[idx] - exact.v[idx]) < 5e-3);
    }
}

TEST_CASE("envelope forward: linear ODE oracle and domination") {
    const PathBundle bundle = small_bundle(200, 5);
    GridProcess u_zero(bundle.n_scenarios(), bundle.n_samples, bundle.path_len());

    // sigma = 0, U = 0, K = 1: S_t = (x+1)e^t - 1
    const GridProcess s =
        envelope_forward(1.0, u_zero, constant_sigma(0.0), bundle, 0.5);
    const double dt = bundle.grid.dt(0);
    for (std::size_t ss = 0; ss < s.n_scenarios; ++ss) {
        for (std::size_t i = 0; i < s.n_samples; ++i) {
            const double oracle = 1.5 * std::exp(1.0) - 1.0;
            CHECK(std::fabs(s.at(ss, i, 200) - oracle) < 3.0 * dt * 1.5 * std::exp(1.0));
        }
    }

    // K = 0, U = 0: dS = sigma dB from x
    const GridProcess pure =
        envelope_forward(0.0, u_zero, constant_sigma(1.0), bundle, 2.0);
    for (std::size_t ss = 0; ss < pure.n_scenarios; ++ss) {
        for (std::size_t i = 0; i < pure.n_samples; ++i) {
            for (std::size_t k = 0; k <= 200; ++k) {
                CHECK(pure.at(ss, i, k) ==
                      doctest::Approx(2.0 + bundle.b_at(ss, i, k)).epsilon(1e-12));
            }
        }
    }

    // S dominates any drift bounded by K(1+|x|+|y|) run under the same bundle
    ForwardSpec spec;
    spec.x0 = 0.5;
    spec.b.fn = [](double, double x, double) { return 0.8 * std::tanh(x); };
    spec.b.growth_M = 0.8;
    spec.b.lipschitz = 0.8;
    spec.b.uses_y = false;
    spec.h = zero_coef_txy();
    spec.sigma = constant_sigma(0.0);
    const GridProcess x = euler_forward(spec, bundle);
    const GridProcess dom =
        envelope_forward(1.0, u_zero, constant_sigma(0.0), bundle, 0.5);
    for (std::size_t idx = 0; idx < x.v.size(); ++idx) {
        CHECK(x.v[idx] <= dom.v[idx] + 1e-9);
    }
}

TEST_CASE("lattice-edge forward Euler: deterministic drifts reproduce ODE solutions") {
    LatticeParams params;
    params.horizon = 1.0;
    params.n_steps = 100;
    params.x0 = 1.0;
    const LatticeLayout layout = make_layout(params, kBand);

    // b = 1, sigma = 0: X(t) = x0 + t at every node
    CoefTXY b;
    b.fn = [](double, double, double) { return 1.0; };
    b.growth_M = 1.0;
    b.lipschitz = 0.0;
    b.uses_y = false;
    const LatticeField x =
        forward_on_lattice(layout, 1.0, b, zero_coef_txy(), constant_sigma(0.0), nullptr,
                           nullptr);
    for (std::size_t k = 0; k <= 100; ++k) {
        for (std::size_t j = 0; j < layout.n_nodes; ++j) {
            CHECK(x.at(k, j) == doctest::Approx(1.0 + layout.grid.time(k)).epsilon(1e-12));
        }
    }

    // sigma = 1 identity coupling: X(t, node) tracks the node coordinate shift
    const LatticeField xb = forward_on_lattice(layout, 1.0, zero_coef_txy(), zero_coef_txy(),
                                               constant_sigma(1.0), nullptr, nullptr);
    for (std::size_t k = 0; k <= 100; ++k) {
        for (std::size_t j = 1; j + 1 < layout.n_nodes; ++j) {
            CHECK(xb.at(k, j) ==
                  doctest::Approx(1.0 + (layout.x(j) - params.x0)).epsilon(1e-9));
        }
    }
}
