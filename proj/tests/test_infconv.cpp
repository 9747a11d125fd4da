#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "gsde/errors.hpp"
#include "gsde/infconv.hpp"

using namespace gsde;

namespace {

GrowthBoundedFunction square_fn() {
    // x^2 with declared growth M = 1.5 valid on |x| <= (1.5+sqrt(8.25))/2 ~ 2.18
    GrowthBoundedFunction f;
    f.eval = [](std::span<const double> p) { return p[0] * p[0]; };
    f.arity = 1;
    f.growth_M = 1.5;
    f.audit_radius = 2.1;
    return f;
}

// Closed-form oracle for f = x^2: minimizer y* = sign(x) min(|x|, n/2), so
// f_n(x) = x^2 for |x| <= n/2 and n|x| - n^2/4 beyond the kink.
double square_infconv_oracle(double x, double n) {
    if (std::fabs(x) <= n / 2.0) return x * x;
    return n * std::fabs(x) - n * n / 4.0;
}

double query(const InfConvApprox& approx, double x) {
    const std::array<double, 1> q{x};
    return inf_convolve(approx, q);
}

} // namespace

TEST_CASE("constant function is its own inf-convolution") {
    GrowthBoundedFunction f;
    f.eval = [](std::span<const double>) { return 4.5; };
    f.arity = 1;
    f.growth_M = 4.5;
    InfConvApprox approx{f, 6.0, GridPolicy{}, std::nullopt};
    for (double x : {-3.0, -0.5, 0.0, 2.0}) {
        CHECK(query(approx, x) == doctest::Approx(4.5).epsilon(1e-12));
    }
}

TEST_CASE("closed-form oracle agreement for f = x^2 at level 2") {
    InfConvApprox approx{square_fn(), 2.0, GridPolicy{}, std::nullopt};
    CHECK(query(approx, 2.0) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(query(approx, 0.5) == doctest::Approx(0.25).epsilon(1e-9));
    for (double x : {-2.0, -1.3, -0.9, 0.0, 0.4, 1.0, 1.7, 2.05}) {
        CHECK(query(approx, x) ==
              doctest::Approx(square_infconv_oracle(x, 2.0)).epsilon(1e-9));
    }
}

TEST_CASE("level below the growth constant is rejected") {
    InfConvApprox approx{square_fn(), 1.0, GridPolicy{}, std::nullopt};
    const std::array<double, 1> q{1.0};
    CHECK_THROWS_AS(inf_convolve(approx, q), ConfigError);
}

TEST_CASE("declared-Lipschitz base short-circuits exactly") {
    GrowthBoundedFunction f;
    const double m = 1.5;
    f.eval = [m](std::span<const double> p) { return m * std::fabs(p[0]); };
    f.arity = 1;
    f.growth_M = m;
    f.lipschitz = m;
    InfConvApprox approx{f, m, GridPolicy{}, std::nullopt}; // n = M allowed when exact
    for (double x : {-2.0, 0.0, 0.7, 3.0}) {
        CHECK(query(approx, x) == m * std::fabs(x));
    }
    CHECK(approx.exact());
}

TEST_CASE("result never exceeds f(x) and keeps linear growth") {
    InfConvApprox approx{square_fn(), 2.0, GridPolicy{}, std::nullopt};
    for (double x = -2.0; x <= 2.0; x += 0.37) {
        const double fn = query(approx, x);
        CHECK(fn <= x * x + 1e-12);
        CHECK(std::fabs(fn) <= 1.5 * (1.0 + std::fabs(x)) + 1e-9);
    }
}

TEST_CASE("lipschitz audit stays below the level plus grid tolerance") {
    InfConvApprox approx{square_fn(), 2.0, GridPolicy{}, std::nullopt};
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
    // pairs spanning the kink at |x| = 1
    pairs.push_back({{0.8}, {1.2}});
    pairs.push_back({{-1.15}, {-0.85}});
    pairs.push_back({{0.95}, {1.05}});
    for (double x = -2.0; x < 2.0; x += 0.31) {
        pairs.push_back({{x}, {x + 0.21}});
    }
    const double ratio = lipschitz_audit(approx, pairs);
    CHECK(ratio <= 2.0 + 1e-6);

    // constant f: ratio 0
    GrowthBoundedFunction c;
    c.eval = [](std::span<const double>) { return 1.0; };
    c.arity = 1;
    c.growth_M = 1.0;
    InfConvApprox capprox{c, 2.0, GridPolicy{}, std::nullopt};
    CHECK(lipschitz_audit(capprox, pairs) == 0.0);

    // f = M|x| at level M with declared Lipschitz: ratio <= M
    GrowthBoundedFunction mabs;
    mabs.eval = [](std::span<const double> p) { return 1.5 * std::fabs(p[0]); };
    mabs.arity = 1;
    mabs.growth_M = 1.5;
    mabs.lipschitz = 1.5;
    InfConvApprox mapprox{mabs, 1.5, GridPolicy{}, std::nullopt};
    CHECK(lipschitz_audit(mapprox, pairs) <= 1.5 + 1e-12);
}

TEST_CASE("monotone ladder: x^2 at x=2 over levels 2,4,8,16") {
    std::vector<double> levels{2.0, 4.0, 8.0, 16.0};
    std::vector<std::vector<double>> queries{{2.0}};
    const auto matrix = monotone_ladder(square_fn(), levels, queries);
    REQUIRE(matrix.size() == 4);
    CHECK(matrix[0][0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(matrix[1][0] == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(matrix[2][0] == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(matrix[3][0] == doctest::Approx(4.0).epsilon(1e-9));
    for (std::size_t l = 0; l + 1 < matrix.size(); ++l) {
        CHECK(matrix[l][0] <= matrix[l + 1][0] + 1e-9);
    }
}

TEST_CASE("monotone ladder: constant rows and single level") {
    GrowthBoundedFunction c;
    c.eval = [](std::span<const double>) { return -0.25; };
    c.arity = 1;
    c.growth_M = 0.3;
    std::vector<std::vector<double>> queries{{-1.0}, {0.0}, {2.0}};
    const auto rows = monotone_ladder(c, std::vector<double>{1.0, 2.0, 4.0}, queries);
    for (const auto& row : rows) {
        for (double v : row) CHECK(v == doctest::Approx(-0.25).epsilon(1e-12));
    }
    const auto single = monotone_ladder(square_fn(), std::vector<double>{2.0}, queries);
    CHECK(single.size() == 1);
}

TEST_CASE("ladder is pointwise nondecreasing and converges on refinement") {
    // |x|^{3/2}: continuous, not Lipschitz at the large end of the audit box;
    // growth M = 2 valid for |x| <= ~2.8.
    GrowthBoundedFunction f;
    f.eval = [](std::span<const double> p) {
        return std::pow(std::fabs(p[0]), 1.5);
    };
    f.arity = 1;
    f.growth_M = 1.8;
    f.audit_radius = 2.5;
    f.audit_growth();

    std::vector<std::vector<double>> queries;
    for (double x = -2.4; x <= 2.4; x += 0.3) queries.push_back({x});
    const std::vector<double> levels{2.0, 4.0, 8.0, 16.0, 32.0};
    const auto matrix = monotone_ladder(f, levels, queries);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
            CHECK(matrix[l][q] <= matrix[l + 1][q] + 1e-10);
        }
        CHECK(matrix[levels.size() - 1][q] <=
              f.eval(queries[q]) + 1e-10);
    }
    // top level within a refinement-schedule tolerance of f
    double worst = 0.0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        worst = std::max(worst, f.eval(queries[q]) - matrix[levels.size() - 1][q]);
    }
    CHECK(worst < 0.05);
}

TEST_CASE("refinement schedule: doubling n and halving spacing shrinks the gap") {
    GrowthBoundedFunction f;
    f.eval = [](std::span<const double> p) {
        return std::pow(std::fabs(p[0]), 1.5);
    };
    f.arity = 1;
    f.growth_M = 1.8;

    std::vector<std::vector<double>> queries;
    for (double x = -2.0; x <= 2.0; x += 0.13) queries.push_back({x});

    double level = 4.0;
    GridPolicy grid;
    grid.coarse_points = 33;
    grid.refine_rounds = 0; // raw grid, no local refinement: pure schedule test
    double prev_gap = 1e18;
    for (int stage = 0; stage < 4; ++stage) {
        InfConvApprox approx{f, level, grid, std::nullopt};
        double gap = 0.0;
        for (const auto& q : queries) {
            gap = std::max(gap, f.eval(q) - inf_convolve(approx, q));
        }
        CHECK(gap <= prev_gap + 1e-12);
        prev_gap = gap;
        level *= 2.0;
        grid.coarse_points = 2 * (grid.coarse_points - 1) + 1; // halve the spacing
    }
    CHECK(prev_gap < 0.02);
}

TEST_CASE("monotonicity transfers from base to minorant at audited points") {
    GrowthBoundedFunction f;
    f.eval = [](std::span<const double> p) { return std::atan(p[0]) + 0.5 * p[0]; };
    f.arity = 1;
    f.growth_M = 1.5;
    f.monotone_flags = {1};
    InfConvApprox approx{f, 3.0, GridPolicy{}, std::nullopt};
    double prev = -1e18;
    for (double x = -2.0; x <= 2.0; x += 0.2) {
        const double v = query(approx, x);
        CHECK(v >= prev - 1e-10);
        prev = v;
    }
}

TEST_CASE("growth audit flags a mis-declared function") {
    GrowthBoundedFunction liar;
    liar.eval = [](std::span<const double> p) { return 10.0 * p[0] * p[0]; };
    liar.arity = 1;
    liar.growth_M = 0.5;
    liar.audit_radius = 3.0;
    CHECK_THROWS_AS(liar.audit_growth(), InvariantError);
}

TEST_CASE("arity above 3 needs an explicit candidate set") {
    GrowthBoundedFunction f;
    f.eval = [](std::span<const double> p) { return p[0] + p[1] + p[2] + p[3]; };
    f.arity = 4;
    f.growth_M = 1.0;
    InfConvApprox no_candidates{f, 4.0, GridPolicy{}, std::nullopt};
    const std::array<double, 4> q{0.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(inf_convolve(no_candidates, q), ConfigError);

    InfConvApprox with_candidates{f, 4.0, GridPolicy{},
                                  std::vector<std::vector<double>>{{0.1, 0.0, 0.0, 0.0}}};
    CHECK(inf_convolve(with_candidates, q) <= 0.0 + 1e-12);
}

TEST_CASE("2-D inf-convolution agrees with a dense brute-force oracle") {
    GrowthBoundedFunction f;
    f.eval = [](std::span<const double> p) {
        return std::fabs(p[0]) + 0.5 * p[1] * p[1];
    };
    f.arity = 2;
    f.growth_M = 1.6;
    GridPolicy coarse;
    coarse.coarse_points = 65;
    InfConvApprox approx{f, 3.0, coarse, std::nullopt};

    // brute force over a fine fixed box
    auto oracle = [&](double x0, double x1) {
        double best = 1e18;
        for (double u = -4.0; u <= 4.0; u += 0.002) {
            for (double v = -2.0; v <= 2.0; v += 0.01) {
                const double d = std::sqrt((x0 - u) * (x0 - u) + (x1 - v) * (x1 - v));
                best = std::min(best, std::fabs(u) + 0.5 * v * v + 3.0 * d);
            }
        }
        return best;
    };
    for (const auto& q : std::vector<std::array<double, 2>>{{0.5, 0.5}, {-1.0, 1.0}}) {
        CHECK(inf_convolve(approx, q) == doctest::Approx(oracle(q[0], q[1])).epsilon(5e-3));
    }
}
