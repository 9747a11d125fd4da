#include "gsde/lattice.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "gsde/errors.hpp"
#include "gsde/par.hpp"

namespace gsde {

void LatticeLayout::validate() const {
    band.validate();
    if (n_nodes < 3) throw ConfigError("lattice needs at least 3 nodes per layer");
    if (!(dx > 0.0)) throw ConfigError("lattice node spacing must be positive");
    if (grid.n_steps() == 0) throw ConfigError("lattice needs at least one time step");
    const double ratio = stability_ratio();
    if (ratio > 0.5 + 1e-12) {
        throw ConfigError("explicit scheme stability violated: sigma_hi^2*dt/dx^2 = " +
                          std::to_string(ratio) + " > 0.5");
    }
}

LatticeLayout make_layout(const LatticeParams& params, const VolatilityBand& band) {
    band.validate();
    if (params.n_steps == 0) throw ConfigError("lattice resolution must have n_steps >= 1");
    if (!(params.stability > 0.0) || params.stability > 0.5) {
        throw ConfigError("lattice stability target must lie in (0, 0.5]");
    }
    LatticeLayout layout;
    layout.grid = TimeGrid::uniform(params.horizon, params.n_steps);
    layout.band = band;
    const double dt = layout.grid.dt(0);
    layout.dx = band.sigma_hi * std::sqrt(dt / params.stability);
    const double half_width = std::fabs(params.x0) +
                              params.width_sigmas * band.sigma_hi * std::sqrt(params.horizon);
    const auto side = static_cast<std::size_t>(std::ceil(half_width / layout.dx));
    layout.n_nodes = 2 * side + 1;
    layout.x_lo = params.x0 - layout.dx * static_cast<double>(side);
    layout.validate();
    return layout;
}

void gheat_step(std::span<const double> in, std::span<double> out,
                const VolatilityBand& band, double dt, double dx,
                std::span<double> var_out) {
    const std::size_t n = in.size();
    const double inv_dx2 = 1.0 / (dx * dx);
    const double hi2 = band.hi2();
    const double lo2 = band.lo2();
    const bool want_var = !var_out.empty();
    par::parallel_for(static_cast<std::int64_t>(n), [&](std::int64_t ji) {
        const auto j = static_cast<std::size_t>(ji);
        double a = 0.0;
        if (j > 0 && j + 1 < n) {
            a = (in[j + 1] - 2.0 * in[j] + in[j - 1]) * inv_dx2;
        }
        out[j] = in[j] + dt * g_function(a, band);
        if (want_var) var_out[j] = (a >= 0.0) ? hi2 : lo2;
    });
}

std::vector<double> conditional_expectation_step(std::span<const double> layer,
                                                 const VolatilityBand& band, double dt,
                                                 double dx) {
    band.validate();
    if (layer.size() < 3) throw ConfigError("conditional expectation step needs >= 3 nodes");
    const double ratio = band.hi2() * dt / (dx * dx);
    if (ratio > 0.5 + 1e-12) {
        throw ConfigError("explicit scheme stability violated: sigma_hi^2*dt/dx^2 = " +
                          std::to_string(ratio) + " > 0.5");
    }
    std::vector<double> out(layer.size());
    gheat_step(layer, out, band, dt, dx);
    return out;
}

Lattice solve_gheat(const std::function<double(double)>& phi, const VolatilityBand& band,
                    const LatticeParams& params) {
    Lattice lattice;
    lattice.layout = make_layout(params, band);
    const LatticeLayout& lay = lattice.layout;
    const std::size_t n_layers = lay.grid.n_times();
    lattice.values = LatticeField(n_layers, lay.n_nodes);

    auto terminal = lattice.values.layer(n_layers - 1);
    par::parallel_for(static_cast<std::int64_t>(lay.n_nodes), [&](std::int64_t j) {
        terminal[static_cast<std::size_t>(j)] = phi(lay.x(static_cast<std::size_t>(j)));
    });
    for (std::size_t j = 0; j < lay.n_nodes; ++j) {
        if (!std::isfinite(terminal[j])) {
            throw NumericError("terminal payoff non-finite at node x = " +
                               std::to_string(lay.x(j)));
        }
    }

    for (std::size_t k = n_layers - 1; k-- > 0;) {
        gheat_step(lattice.values.layer(k + 1), lattice.values.layer(k), lay.band,
                   lay.grid.dt(k), lay.dx);
    }
    return lattice;
}

double expected_path_sum(const LatticeLayout& layout, const LatticeField& increments) {
    const std::size_t n_layers = layout.grid.n_times();
    std::vector<double> w(layout.n_nodes, 0.0);
    std::vector<double> next(layout.n_nodes, 0.0);
    for (std::size_t j = 0; j < layout.n_nodes; ++j) {
        w[j] = increments.at(n_layers - 1, j);
    }
    for (std::size_t k = n_layers - 1; k-- > 0;) {
        gheat_step(w, next, layout.band, layout.grid.dt(k), layout.dx);
        for (std::size_t j = 0; j < layout.n_nodes; ++j) {
            next[j] += increments.at(k, j);
        }
        w.swap(next);
    }
    return w[layout.root()];
}

void write_lattice_csv(const Lattice& lattice, std::ostream& os) {
    os << "# gsde csv gheat v1\n";
    os << "t,x,value\n";
    char buf[96];
    const LatticeLayout& lay = lattice.layout;
    for (std::size_t k = 0; k < lay.grid.n_times(); ++k) {
        for (std::size_t j = 0; j < lay.n_nodes; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", lay.grid.time(k), lay.x(j),
                          lattice.values.at(k, j));
            os << buf;
        }
    }
}

} // namespace gsde
