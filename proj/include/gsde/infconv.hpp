#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace gsde {

/// Continuous coefficient with declared linear growth |f(x)| <= M(1 + |x|),
/// optional declared Lipschitz constant, and per-argument monotonicity flags
/// (+1 nondecreasing, 0 unconstrained). Declarations are audited, not assumed.
struct GrowthBoundedFunction {
    std::function<double(std::span<const double>)> eval;
    std::size_t arity = 1;
    double growth_M = 0.0;
    std::vector<int> monotone_flags;
    std::optional<double> lipschitz;
    double audit_radius = 4.0;

    double operator()(std::span<const double> x) const { return eval(x); }

    /// Spot-checks |f| <= M(1+|x|) on a deterministic sample of the audit box;
    /// throws InvariantError on a violation.
    void audit_growth(std::size_t n_probes = 128) const;
};

/// Candidate-search policy for the grid infimum. The coarse pass uses spacing
/// radius/((coarse_points-1)/2); refinement re-grids around the incumbent.
struct GridPolicy {
    std::size_t coarse_points = 513;
    std::size_t refine_points = 17;
    std::size_t refine_rounds = 8;
};

/// n-Lipschitz minorant f_n(x) = inf_y { f(y) + n |x - y| } evaluated over a
/// query-centered candidate grid. When the base declares a Lipschitz constant
/// <= n the infimum is attained at y = x and the search is skipped.
struct InfConvApprox {
    GrowthBoundedFunction base;
    double level = 0.0;
    GridPolicy grid;
    std::optional<std::vector<std::vector<double>>> candidates; // required for arity > 3

    bool exact() const { return base.lipschitz && *base.lipschitz <= level; }
    void validate() const;
};

double inf_convolve(const InfConvApprox& approx, std::span<const double> x);

/// max |f_n(x) - f_n(x')| / |x - x'| over the supplied pairs.
double lipschitz_audit(const InfConvApprox& approx,
                       std::span<const std::pair<std::vector<double>, std::vector<double>>> pairs);

/// Values of f_n at each (level, query), levels ascending. All levels must be
/// >= the growth constant.
std::vector<std::vector<double>> monotone_ladder(const GrowthBoundedFunction& base,
                                                 std::span<const double> levels,
                                                 std::span<const std::vector<double>> queries,
                                                 const GridPolicy& grid = {});

} // namespace gsde
