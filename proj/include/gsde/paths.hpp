#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "gsde/band.hpp"
#include "gsde/measure.hpp"
#include "gsde/time_grid.hpp"

namespace gsde {

/// One element of the finite scenario family: a piecewise-constant volatility
/// control on the grid. The id keys the random streams, so adding scenarios to
/// a family never re-draws existing paths.
struct ScenarioControl {
    std::uint64_t id = 0;
    TimeGrid grid;
    std::vector<double> sigma_steps;

    void validate(const VolatilityBand& band) const;
};

/// All 2^depth assignments of {sigma_lo, sigma_hi} to `depth` equal blocks of
/// the grid. Collapses to the single classical control when the band is
/// degenerate. Bang-bang controls attain the sublinear-expectation supremum
/// for directionally convex payoffs, which is why they are the default family.
std::vector<ScenarioControl> bang_bang_family(const TimeGrid& grid, const VolatilityBand& band,
                                              int depth);

/// Per-scenario, per-sample discretized paths of B and its quadratic variation
/// on a shared grid. B increments over step k are N(0, sigma_k^2 dt) from
/// counter-based streams; QV increments are exactly sigma_k^2 dt.
struct PathBundle {
    TimeGrid grid;
    VolatilityBand band;
    std::vector<ScenarioControl> controls;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::vector<double> b;  // (scenario*n_samples + sample)*(n_steps+1) + k
    std::vector<double> qv; // same layout

    std::size_t n_scenarios() const { return controls.size(); }
    std::size_t path_len() const { return grid.n_times(); }
    std::size_t offset(std::size_t s, std::size_t i) const {
        return (s * n_samples + i) * path_len();
    }
    double b_at(std::size_t s, std::size_t i, std::size_t k) const {
        return b[offset(s, i) + k];
    }
    double qv_at(std::size_t s, std::size_t i, std::size_t k) const {
        return qv[offset(s, i) + k];
    }
    /// Exact per-step QV increment sigma_k^2 dt of scenario s.
    double dqv(std::size_t s, std::size_t k) const {
        const double sig = controls[s].sigma_steps[k];
        return sig * sig * grid.dt(k);
    }
};

PathBundle simulate_paths(const ScenarioControl& control, const VolatilityBand& band,
                          std::size_t n_samples, std::uint64_t seed);
PathBundle simulate_paths(std::vector<ScenarioControl> family, const VolatilityBand& band,
                          std::size_t n_samples, std::uint64_t seed);

/// Adapted step process aligned with a bundle (value over step k fixed at t_k).
struct StepProcess {
    std::size_t n_scenarios = 0;
    std::size_t n_samples = 0;
    std::size_t n_steps = 0;
    std::vector<double> v;

    double at(std::size_t s, std::size_t i, std::size_t k) const {
        return v[(s * n_samples + i) * n_steps + k];
    }
    double& at(std::size_t s, std::size_t i, std::size_t k) {
        return v[(s * n_samples + i) * n_steps + k];
    }
};

/// Builds eta_k = fn(t_k, B_k) on every (scenario, sample) of the bundle.
StepProcess adapted_process(const PathBundle& bundle,
                            const std::function<double(double, double)>& fn);

/// Left-endpoint Ito sums sum_k eta_k (B_{k+1} - B_k), one value per
/// (scenario, sample), flattened scenario-major. Rejects misaligned shapes.
std::vector<double> ito_integral(const StepProcess& eta, const PathBundle& bundle);

/// Riemann-Stieltjes sums against the quadratic variation.
std::vector<double> qv_integral(const StepProcess& eta, const PathBundle& bundle);

struct BdgConstants {
    double c_p = 1.0;
    double C_p = 4.0; // Doob constant for p = 2
};

struct BdgReport {
    double p = 2.0;
    double base = 0.0;     // E^[(int |eta|^2 ds)^(p/2)]
    double lhs = 0.0;      // sigma_lo^p * c_p * base
    double mid = 0.0;      // E^[sup_t |int eta dB|^p]
    double rhs = 0.0;      // sigma_hi^p * C_p * base
    double base_se = 0.0;  // largest per-scenario standard error
    double mid_se = 0.0;
    double ratio_low = 0.0;  // mid / lhs
    double ratio_high = 0.0; // rhs / mid
    bool ordered = false;    // lhs <= mid <= rhs within 3 standard errors
};

/// Monte-Carlo estimates of both sides of the Burkholder-Davis-Gundy-style
/// bounds for the family. eta is evaluated as eta(t_k, B_k). Requires p >= 2.
BdgReport bdg_diagnostic(const std::function<double(double, double)>& eta,
                         const std::vector<ScenarioControl>& family,
                         const VolatilityBand& band, double p, std::size_t n_samples,
                         std::uint64_t seed, const BdgConstants& constants = {});

/// ProcessSamples view of a step process (for discrete_norm).
ProcessSamples to_process_samples(const StepProcess& eta);

/// CSV dump, columns scenario,sample,t,B,QV.
void write_paths_csv(const PathBundle& bundle, std::ostream& os);

} // namespace gsde
