#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gsde/band.hpp"
#include "gsde/errors.hpp"
#include "gsde/measure.hpp"
#include "gsde/paths.hpp"

using namespace gsde;

namespace {

// Random finite families with shared outcomes, so payoff algebra is exact.
MeasureFamily random_family(std::mt19937_64& gen, std::size_t n_members,
                            std::size_t n_atoms) {
    std::uniform_real_distribution<double> value(-2.0, 2.0);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    MeasureFamily family;
    for (std::size_t m = 0; m < n_members; ++m) {
        DiscreteLaw law;
        double total = 0.0;
        for (std::size_t a = 0; a < n_atoms; ++a) {
            law.atoms.push_back({value(gen), weight(gen)});
            total += law.atoms.back().prob;
        }
        for (Atom& atom : law.atoms) atom.prob /= total;
        family.members.push_back(std::move(law));
    }
    return family;
}

Payoff random_payoff(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> coef(-1.5, 1.5);
    const double a = coef(gen), b = coef(gen), c = coef(gen);
    return [a, b, c](double x) { return a + b * x + c * std::tanh(x); };
}

} // namespace

TEST_CASE("g_function matches its closed form") {
    const VolatilityBand band{0.5, 1.0};
    CHECK(g_function(0.0, band) == 0.0);
    CHECK(g_function(1.0, band) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g_function(-2.0, band) == doctest::Approx(-0.25).epsilon(1e-15));
}

TEST_CASE("g_function properties: homogeneity, monotone, G(a)+G(-a) >= 0") {
    const VolatilityBand band{0.3, 0.9};
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> curv(-5.0, 5.0);
    std::uniform_real_distribution<double> lam(0.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        const double a = curv(gen);
        const double b = curv(gen);
        const double l = lam(gen);
        CHECK(g_function(a, band) + g_function(-a, band) >= -1e-15);
        CHECK(g_function(l * a, band) == doctest::Approx(l * g_function(a, band)).epsilon(1e-12));
        if (a <= b) CHECK(g_function(a, band) <= g_function(b, band) + 1e-15);
        CHECK(g_function(a + b, band) <= g_function(a, band) + g_function(b, band) + 1e-12);
    }
}

TEST_CASE("band validation") {
    CHECK_THROWS_AS((VolatilityBand{0.0, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS((VolatilityBand{1.0, 0.5}).validate(), ConfigError);
    CHECK_NOTHROW((VolatilityBand{0.5, 0.5}).validate());
}

TEST_CASE("sublinear expectation basics") {
    MeasureFamily family;
    family.members.push_back({{{1.0, 0.5}, {1.0, 0.5}}});
    family.members.push_back({{{2.0, 0.5}, {4.0, 0.5}}});
    const Payoff identity = [](double x) { return x; };
    CHECK(sublinear_expectation(identity, family) == doctest::Approx(3.0));
    const Payoff constant = [](double) { return 7.25; };
    CHECK(sublinear_expectation(constant, family) == doctest::Approx(7.25).epsilon(1e-15));

    MeasureFamily empty;
    CHECK_THROWS_AS(sublinear_expectation(identity, empty), ConfigError);

    MeasureFamily bad;
    bad.members.push_back({{{1.0, 0.7}, {2.0, 0.7}}});
    CHECK_THROWS_AS(sublinear_expectation(identity, bad), ConfigError);
}

TEST_CASE("axioms hold to 1e-12 on random payoff pairs") {
    std::mt19937_64 gen(42);
    for (int round = 0; round < 200; ++round) {
        const MeasureFamily family = random_family(gen, 4, 16);
        const Payoff x = random_payoff(gen);
        const Payoff y = random_payoff(gen);
        const double ex = sublinear_expectation(x, family);
        const double ey = sublinear_expectation(y, family);

        // monotonicity: X + |offset| >= X pointwise
        const Payoff shifted = [&x](double w) { return x(w) + 0.75; };
        CHECK(sublinear_expectation(shifted, family) >= ex - 1e-12);

        // constant preserving through translation: E[X + c] = E[X] + c
        CHECK(sublinear_expectation(shifted, family) ==
              doctest::Approx(ex + 0.75).epsilon(1e-12));

        // sub-additivity
        const Payoff sum = [&x, &y](double w) { return x(w) + y(w); };
        CHECK(sublinear_expectation(sum, family) <= ex + ey + 1e-12);

        // positive homogeneity
        const double lambda = 1.7;
        const Payoff scaled = [&x, lambda](double w) { return lambda * x(w); };
        CHECK(sublinear_expectation(scaled, family) ==
              doctest::Approx(lambda * ex).epsilon(1e-12));
    }
}

TEST_CASE("monotone convergence surrogate: decreasing payoffs") {
    std::mt19937_64 gen(9);
    const MeasureFamily family = random_family(gen, 3, 12);
    const Payoff base = random_payoff(gen);
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= 10; ++n) {
        const double bump = 1.0 / n;
        const Payoff xn = [&base, bump](double w) { return base(w) + bump; };
        const double e = sublinear_expectation(xn, family);
        CHECK(e <= prev + 1e-13);
        prev = e;
    }
    CHECK(prev == doctest::Approx(sublinear_expectation(base, family) + 0.1).epsilon(1e-12));
}

TEST_CASE("discrete_norm: zero and constant processes") {
    ProcessSamples eta;
    eta.n_scenarios = 2;
    eta.n_samples = 3;
    eta.n_steps = 10;
    eta.values.assign(2 * 3 * 10, 0.0);
    std::vector<double> dt(10, 0.1);
    CHECK(discrete_norm(eta, 2.0, NormMode::integral, dt) == 0.0);

    for (double& v : eta.values) v = -1.5;
    CHECK(discrete_norm(eta, 2.0, NormMode::integral, dt) ==
          doctest::Approx(1.5).epsilon(1e-12));
    CHECK(discrete_norm(eta, 3.0, NormMode::running_sup, dt) ==
          doctest::Approx(1.5).epsilon(1e-12));
    CHECK_THROWS_AS(discrete_norm(eta, 0.5, NormMode::integral, dt), ConfigError);
}

TEST_CASE("discrete_norm of B against the classical Brownian oracle") {
    // Single sigma_hi scenario: E int_0^1 B_t^2 dt = sigma^2 T^2 / 2.
    const VolatilityBand band{1.0, 1.0};
    const TimeGrid grid = TimeGrid::uniform(1.0, 64);
    const auto family = bang_bang_family(grid, band, 1);
    const PathBundle bundle = simulate_paths(family, band, 20000, 424242);

    StepProcess eta = adapted_process(bundle, [](double, double b) { return b; });
    const double norm =
        discrete_norm(to_process_samples(eta), 2.0, NormMode::integral,
                      std::vector<double>(64, grid.dt(0)));
    // Left-endpoint sum biases the oracle by -sigma^2*T*dt/2; 3 SE on top.
    const double oracle = std::sqrt(0.5 - 0.5 * grid.dt(0));
    const double se = 0.5 / std::sqrt(20000.0); // rough bound for the functional
    CHECK(std::fabs(norm - oracle) < 3.0 * se + 0.01);
}
