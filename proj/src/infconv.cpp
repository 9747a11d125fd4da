#include "gsde/infconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gsde/errors.hpp"
#include "gsde/par.hpp"
#include "gsde/rng.hpp"

namespace gsde {

void GrowthBoundedFunction::audit_growth(std::size_t n_probes) const {
    std::vector<double> point(arity);
    for (std::size_t i = 0; i < n_probes; ++i) {
        double norm2 = 0.0;
        for (std::size_t d = 0; d < arity; ++d) {
            const double u = rng::uniform01(0x9eb1u, i, d, 0, 2);
            point[d] = (2.0 * u - 1.0) * audit_radius;
            norm2 += point[d] * point[d];
        }
        const double fv = eval(point);
        const double bound = growth_M * (1.0 + std::sqrt(norm2));
        if (!(std::fabs(fv) <= bound + 1e-12)) {
            throw InvariantError("declared linear growth violated: |f| = " +
                                 std::to_string(std::fabs(fv)) + " > M(1+|x|) = " +
                                 std::to_string(bound));
        }
    }
}

void InfConvApprox::validate() const {
    if (!base.eval) throw ConfigError("inf-convolution base function is empty");
    if (base.arity == 0) throw ConfigError("inf-convolution base arity must be >= 1");
    if (!(level >= base.growth_M)) {
        throw ConfigError("inf-convolution level n = " + std::to_string(level) +
                          " below the growth constant M = " + std::to_string(base.growth_M));
    }
    if (exact() || candidates) return;
    if (base.arity > 3) {
        throw ConfigError("grid search capped at arity 3; supply a candidate set");
    }
    if (!(level > base.growth_M)) {
        throw ConfigError("grid search needs n > M for a finite candidate radius; "
                          "declare a Lipschitz constant to evaluate at n = M");
    }
    if (grid.coarse_points < 3 || grid.refine_points < 3) {
        throw ConfigError("grid policy needs at least 3 points per axis");
    }
}

namespace {

struct Candidate {
    double value = std::numeric_limits<double>::infinity();
    std::vector<double> y;

    // Total order: value first, ties toward lexicographically smaller y.
    bool better_than(const Candidate& other) const {
        if (value != other.value) return value < other.value;
        return y < other.y;
    }
};

double euclid(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return std::sqrt(s);
}

/// Best candidate over the tensor grid center +- half*h per axis.
Candidate grid_min(const InfConvApprox& approx, std::span<const double> x,
                   std::span<const double> center, std::size_t half, double h) {
    const std::size_t m = approx.base.arity;
    const std::size_t per_axis = 2 * half + 1;
    std::size_t total = 1;
    for (std::size_t d = 0; d < m; ++d) total *= per_axis;

    const std::size_t n_blocks = (total + 2047) / 2048;
    std::vector<Candidate> block_best(n_blocks);
    par::parallel_for(static_cast<std::int64_t>(n_blocks), [&](std::int64_t bi) {
        const std::size_t lo = static_cast<std::size_t>(bi) * 2048;
        const std::size_t hi = std::min(lo + 2048, total);
        Candidate best;
        std::vector<double> y(m);
        for (std::size_t flat = lo; flat < hi; ++flat) {
            std::size_t rem = flat;
            for (std::size_t d = 0; d < m; ++d) {
                const auto step = static_cast<long>(rem % per_axis) - static_cast<long>(half);
                y[d] = center[d] + h * static_cast<double>(step);
                rem /= per_axis;
            }
            const double v = approx.base.eval(y) + approx.level * euclid(x, y);
            Candidate c{v, y};
            if (c.better_than(best)) best = std::move(c);
        }
        block_best[static_cast<std::size_t>(bi)] = std::move(best);
    });

    Candidate best;
    for (Candidate& c : block_best) {
        if (c.better_than(best)) best = std::move(c);
    }
    return best;
}

} // namespace

double inf_convolve(const InfConvApprox& approx, std::span<const double> x) {
    approx.validate();
    if (x.size() != approx.base.arity) {
        throw ConfigError("inf-convolution query arity mismatch");
    }
    const double fx = approx.base.eval(x);
    if (approx.exact()) return fx;

    // y = x is always a candidate, so f_n(x) <= f(x).
    Candidate best{fx, std::vector<double>(x.begin(), x.end())};

    if (approx.candidates) {
        for (const std::vector<double>& y : *approx.candidates) {
            const double v = approx.base.eval(y) + approx.level * euclid(x, y);
            Candidate c{v, y};
            if (c.better_than(best)) best = std::move(c);
        }
        return best.value;
    }

    // Beyond radius (M(1+|x|) + f(x) + 1)/(n - M) the penalty n|x-y| exceeds
    // any possible improvement over y = x, so truncation is lossless up to
    // grid spacing; one spacing unit of padding covers the edge.
    double xnorm = 0.0;
    for (double c : x) xnorm += c * c;
    xnorm = std::sqrt(xnorm);
    const double m = approx.base.growth_M;
    double radius = (m * (1.0 + xnorm) + fx + 1.0) / (approx.level - m);
    radius = std::max(radius, 0.0);

    const std::size_t half = (approx.grid.coarse_points - 1) / 2;
    const double h = radius / static_cast<double>(half);
    if (!(h > 0.0) || !std::isfinite(h)) return best.value;

    Candidate coarse = grid_min(approx, x, x, half + 1, h);
    if (coarse.better_than(best)) best = std::move(coarse);

    const std::size_t rhalf = (approx.grid.refine_points - 1) / 2;
    double window = h;
    for (std::size_t round = 0; round < approx.grid.refine_rounds; ++round) {
        const double rh = window / static_cast<double>(rhalf);
        Candidate local = grid_min(approx, x, best.y, rhalf, rh);
        if (local.better_than(best)) best = std::move(local);
        window = rh;
    }
    return best.value;
}

double lipschitz_audit(const InfConvApprox& approx,
                       std::span<const std::pair<std::vector<double>, std::vector<double>>> pairs) {
    double worst = 0.0;
    for (const auto& [a, b] : pairs) {
        const double dist = euclid(a, b);
        if (dist == 0.0) continue;
        const double fa = inf_convolve(approx, a);
        const double fb = inf_convolve(approx, b);
        worst = std::max(worst, std::fabs(fa - fb) / dist);
    }
    return worst;
}

std::vector<std::vector<double>> monotone_ladder(const GrowthBoundedFunction& base,
                                                 std::span<const double> levels,
                                                 std::span<const std::vector<double>> queries,
                                                 const GridPolicy& grid) {
    std::vector<std::vector<double>> out(levels.size());
    for (std::size_t li = 0; li < levels.size(); ++li) {
        InfConvApprox approx{base, levels[li], grid, std::nullopt};
        approx.validate();
        out[li].resize(queries.size());
        for (std::size_t q = 0; q < queries.size(); ++q) {
            out[li][q] = inf_convolve(approx, queries[q]);
        }
    }
    return out;
}

} // namespace gsde
