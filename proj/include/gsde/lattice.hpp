#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "gsde/band.hpp"
#include "gsde/time_grid.hpp"

namespace gsde {

/// Node values over all layers of a lattice, flat layer-major storage.
struct LatticeField {
    std::size_t n_layers = 0;
    std::size_t n_nodes = 0;
    std::vector<double> data;

    LatticeField() = default;
    LatticeField(std::size_t layers, std::size_t nodes)
        : n_layers(layers), n_nodes(nodes), data(layers * nodes, 0.0) {}

    double at(std::size_t k, std::size_t j) const { return data[k * n_nodes + j]; }
    double& at(std::size_t k, std::size_t j) { return data[k * n_nodes + j]; }
    std::span<const double> layer(std::size_t k) const {
        return {data.data() + k * n_nodes, n_nodes};
    }
    std::span<double> layer(std::size_t k) {
        return {data.data() + k * n_nodes, n_nodes};
    }
};

/// Recombining grid geometry shared by every field of one solve: uniform time
/// steps, uniform node spacing dx, and the volatility band driving the
/// one-step sublinear expectation.
struct LatticeLayout {
    TimeGrid grid;
    VolatilityBand band;
    double dx = 0.0;
    double x_lo = 0.0;
    std::size_t n_nodes = 0;

    double x(std::size_t j) const { return x_lo + dx * static_cast<double>(j); }
    std::size_t root() const { return (n_nodes - 1) / 2; }
    double dt() const { return grid.dt(0); }
    double stability_ratio() const { return band.hi2() * dt() / (dx * dx); }

    /// Explicit-scheme bound sigma_hi^2 dt / dx^2 <= 1/2 and >= 3 nodes.
    void validate() const;
};

struct LatticeParams {
    double horizon = 1.0;
    std::size_t n_steps = 200;
    double x0 = 0.0;
    double width_sigmas = 6.0; // spatial half-width in units of sigma_hi * sqrt(T)
    double stability = 0.5;    // target ratio sigma_hi^2 dt / dx^2
};

LatticeLayout make_layout(const LatticeParams& params, const VolatilityBand& band);

/// One full backward solve: layout plus the value field (layer 0 approximates
/// the sublinear expectation of the terminal payoff).
struct Lattice {
    LatticeLayout layout;
    LatticeField values;

    double root_value() const { return values.at(0, layout.root()); }
};

/// One backward step u <- u + dt * G(D2 u), centered second difference, linear
/// extrapolation (D2 = 0) at the two boundary nodes. When var_out is non-empty
/// it receives the per-node variance attaining the G maximum (sigma_hi^2 for
/// convex curvature, sigma_lo^2 otherwise). Node-parallel, deterministic.
void gheat_step(std::span<const double> in, std::span<double> out,
                const VolatilityBand& band, double dt, double dx,
                std::span<double> var_out = {});

/// Step wrapper returning the new layer; validates stability.
std::vector<double> conditional_expectation_step(std::span<const double> layer,
                                                 const VolatilityBand& band, double dt,
                                                 double dx);

/// Backward induction from phi(x) at the horizon down to layer 0.
Lattice solve_gheat(const std::function<double(double)>& phi, const VolatilityBand& band,
                    const LatticeParams& params);

/// E^[sum_k inc_k(B_k)] at the root, for per-node increments inc (layers
/// 0..n_steps). Exact dynamic programming: W_k = inc_k + step(W_{k+1}).
double expected_path_sum(const LatticeLayout& layout, const LatticeField& increments);

/// CSV dump, columns t,x,value.
void write_lattice_csv(const Lattice& lattice, std::ostream& os);

} // namespace gsde
