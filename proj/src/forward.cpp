#include "gsde/forward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "gsde/errors.hpp"
#include "gsde/par.hpp"

namespace gsde {

void ForwardSpec::validate() const {
    if (!sigma.fn) throw ConfigError("forward spec needs a diffusion coefficient");
    if (!(sigma.lipschitz >= 0.0) || !std::isfinite(sigma.lipschitz)) {
        throw ConfigError("diffusion needs a finite declared Lipschitz constant");
    }
    if (!b.fn || !h.fn) throw ConfigError("forward spec needs drift coefficients (use zero)");
}

namespace {
void require_driver(const ForwardSpec& spec, const GridProcess* y_input,
                    const PathBundle& bundle) {
    const bool needs_y = (spec.b.uses_y && !spec.b.is_zero) || (spec.h.uses_y && !spec.h.is_zero);
    if (needs_y && y_input == nullptr) {
        throw ConfigError("drift depends on y but no driving process was supplied");
    }
    if (y_input != nullptr && !y_input->aligned_with(bundle)) {
        throw ConfigError("driving process grid does not match the path bundle");
    }
}
} // namespace

GridProcess euler_forward(const ForwardSpec& spec, const PathBundle& bundle,
                          const GridProcess* y_input) {
    spec.validate();
    require_driver(spec, y_input, bundle);

    const std::size_t n_scen = bundle.n_scenarios();
    const std::size_t n_steps = bundle.grid.n_steps();
    GridProcess x(n_scen, bundle.n_samples, bundle.path_len());

    std::vector<int> bad_step(n_scen * bundle.n_samples, -1);
    par::parallel_for(static_cast<std::int64_t>(n_scen * bundle.n_samples),
                      [&](std::int64_t idx) {
        const std::size_t s = static_cast<std::size_t>(idx) / bundle.n_samples;
        const std::size_t i = static_cast<std::size_t>(idx) % bundle.n_samples;
        double xv = spec.x0;
        x.at(s, i, 0) = xv;
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double t = bundle.grid.time(k);
            const double dt = bundle.grid.dt(k);
            const double y = y_input ? y_input->at(s, i, k) : 0.0;
            const double db = bundle.b_at(s, i, k + 1) - bundle.b_at(s, i, k);
            xv += spec.b(t, xv, y) * dt + spec.h(t, xv, y) * bundle.dqv(s, k) +
                  spec.sigma(t, xv) * db;
            if (!std::isfinite(xv)) {
                bad_step[static_cast<std::size_t>(idx)] = static_cast<int>(k);
                return;
            }
            x.at(s, i, k + 1) = xv;
        }
    });
    for (std::size_t idx = 0; idx < bad_step.size(); ++idx) {
        if (bad_step[idx] >= 0) {
            throw NumericError("forward Euler produced a non-finite value at step " +
                               std::to_string(bad_step[idx]));
        }
    }
    return x;
}

namespace {
double sup_diff(const GridProcess& a, const GridProcess& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::fabs(a.v[i] - b.v[i]));
    return m;
}
double sup_decrease(const GridProcess& lo, const GridProcess& hi) {
    double m = 0.0;
    for (std::size_t i = 0; i < lo.v.size(); ++i) m = std::max(m, lo.v[i] - hi.v[i]);
    return m;
}
} // namespace

std::pair<GridProcess, LadderReport> solve_forward_monotone(const ForwardSpec& spec,
                                                            const PathBundle& bundle,
                                                            const LadderConfig& ladder,
                                                            const GridProcess* y_input) {
    spec.validate();
    LadderReport report;
    const double first =
        ladder.first_level > 0.0 ? ladder.first_level : std::max(std::ceil(spec.b.growth_M), 2.0);
    const double dt = bundle.grid.n_steps() > 0 ? bundle.grid.dt(0) : 0.0;

    GridProcess current;
    double level = first;
    for (std::size_t j = 0; j < std::max<std::size_t>(ladder.max_levels, 1); ++j) {
        ForwardSpec level_spec = spec;
        level_spec.b = ladder_level_xy(spec.b, level, ladder.grid);
        GridProcess next = euler_forward(level_spec, bundle, y_input);
        report.levels.push_back(level);
        if (j > 0) {
            const double delta = sup_diff(next, current);
            const double slack =
                ladder.slack > 0.0 ? ladder.slack
                                   : 10.0 * dt * (1.0 + par::max_abs(next.v));
            const double decrease = sup_decrease(current, next);
            report.deltas.push_back(delta);
            report.mono_violations.push_back(decrease);
            if (decrease > slack) {
                throw InvariantError(
                    "forward ladder lost monotonicity by " + std::to_string(decrease) +
                    " (> slack " + std::to_string(slack) +
                    "); a declared monotonicity or growth flag is wrong");
            }
            current = std::move(next);
            if (delta < ladder.tol) {
                report.converged = true;
                break;
            }
        } else {
            current = std::move(next);
            // A declared-Lipschitz drift within the first level is already exact.
            if (spec.b.lipschitz && *spec.b.lipschitz <= level) {
                report.converged = true;
                report.deltas.push_back(0.0);
                report.mono_violations.push_back(0.0);
                break;
            }
        }
        level *= 2.0;
    }
    report.levels_used = report.levels.size();
    return {std::move(current), std::move(report)};
}

GridProcess envelope_forward(double envelope_K, const GridProcess& u_process,
                             const CoefTX& sigma, const PathBundle& bundle, double x0) {
    if (!u_process.aligned_with(bundle)) {
        throw ConfigError("envelope U process does not match the path bundle");
    }
    ForwardSpec spec;
    spec.x0 = x0;
    spec.sigma = sigma;
    spec.h = zero_coef_txy();
    spec.b.fn = [envelope_K](double, double s, double u) {
        return envelope_K * (1.0 + std::fabs(s) + std::fabs(u));
    };
    spec.b.growth_M = envelope_K;
    spec.b.lipschitz = envelope_K;
    spec.b.monotone_in_y = true;
    spec.b.uses_y = true;
    return euler_forward(spec, bundle, &u_process);
}

std::vector<double> gronwall_bound(const ForwardSpec& spec, const PathBundle& bundle,
                                   const GridProcess* y_input) {
    const double m = std::max({spec.b.growth_M, spec.h.growth_M, spec.sigma.growth_M});
    const std::size_t n_scen = bundle.n_scenarios();
    const std::size_t n_steps = bundle.grid.n_steps();
    std::vector<double> bound(n_scen * bundle.n_samples, 0.0);
    par::parallel_for(static_cast<std::int64_t>(bound.size()), [&](std::int64_t idx) {
        const std::size_t s = static_cast<std::size_t>(idx) / bundle.n_samples;
        const std::size_t i = static_cast<std::size_t>(idx) % bundle.n_samples;
        double growth = 0.0; // sum of per-step contraction exponents
        double forcing = 0.0;
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double dt = bundle.grid.dt(k);
            const double y = y_input ? std::fabs(y_input->at(s, i, k)) : 0.0;
            const double db = std::fabs(bundle.b_at(s, i, k + 1) - bundle.b_at(s, i, k));
            const double a_k = m * dt + m * bundle.dqv(s, k) + m * db;
            growth += a_k;
            forcing += (m * dt + m * bundle.dqv(s, k)) * (1.0 + y) + m * db;
        }
        bound[static_cast<std::size_t>(idx)] =
            (std::fabs(spec.x0) + forcing) * std::exp(growth);
    });
    return bound;
}

namespace {

/// One lattice-edge Euler sweep for fixed coefficients. Layer 0 holds the
/// state-coordinate function chi with dchi/dx = sigma(0, chi), chi(x0) = x0;
/// the root carries the physical initial value and the off-root extension
/// gives the x-slope the edge predictions need to stay consistent.
LatticeField forward_sweep(const LatticeLayout& layout, double x0, const CoefTXY& b,
                           const CoefTXY& h, const CoefTX& sigma,
                           const LatticeField* y_nodes, const LatticeField* var_choice) {
    const std::size_t n_layers = layout.grid.n_times();
    const std::size_t n = layout.n_nodes;
    LatticeField x(n_layers, n);
    const std::size_t root = layout.root();
    const double t0 = layout.grid.time(0);
    x.at(0, root) = x0;
    for (std::size_t j = root + 1; j < n; ++j) {
        const double prev = x.at(0, j - 1);
        x.at(0, j) = prev + sigma(t0, prev) * layout.dx;
    }
    for (std::size_t j = root; j-- > 0;) {
        const double prev = x.at(0, j + 1);
        x.at(0, j) = prev - sigma(t0, prev) * layout.dx;
    }

    const bool has_h = !h.is_zero;
    if (has_h && var_choice == nullptr) {
        throw ConfigError("lattice forward solve with h != 0 needs a variance-choice field");
    }
    for (std::size_t k = 0; k + 1 < n_layers; ++k) {
        const double t = layout.grid.time(k);
        const double dt = layout.grid.dt(k);
        auto prediction = [&](std::size_t p, double target_x) {
            const double xp = x.at(k, p);
            const double yp = y_nodes ? y_nodes->at(k, p) : 0.0;
            double v = xp + b(t, xp, yp) * dt + sigma(t, xp) * (target_x - layout.x(p));
            if (has_h) v += h(t, xp, yp) * var_choice->at(k, p) * dt;
            return v;
        };
        par::parallel_for(static_cast<std::int64_t>(n), [&](std::int64_t ji) {
            const auto j = static_cast<std::size_t>(ji);
            const double xj = layout.x(j);
            if (j == 0) {
                x.at(k + 1, j) = prediction(j + 1, xj);
            } else if (j + 1 == n) {
                x.at(k + 1, j) = prediction(j - 1, xj);
            } else {
                x.at(k + 1, j) = 0.5 * (prediction(j - 1, xj) + prediction(j + 1, xj));
            }
        });
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(x.at(k + 1, j))) {
                throw NumericError("lattice forward Euler non-finite at step " +
                                   std::to_string(k));
            }
        }
    }
    return x;
}

double field_sup_diff(const LatticeField& a, const LatticeField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    }
    return m;
}
double field_sup_decrease(const LatticeField& lo, const LatticeField& hi) {
    double m = 0.0;
    for (std::size_t i = 0; i < lo.data.size(); ++i) m = std::max(m, lo.data[i] - hi.data[i]);
    return m;
}

} // namespace

LatticeField forward_on_lattice(const LatticeLayout& layout, double x0, const CoefTXY& b,
                                const CoefTXY& h, const CoefTX& sigma,
                                const LatticeField* y_nodes,
                                const LatticeField* var_choice) {
    layout.validate();
    if ((b.uses_y && !b.is_zero) || (h.uses_y && !h.is_zero)) {
        if (y_nodes == nullptr) {
            throw ConfigError("drift depends on y but no driving node field was supplied");
        }
    }
    return forward_sweep(layout, x0, b, h, sigma, y_nodes, var_choice);
}

std::pair<LatticeField, LadderReport> forward_on_lattice_monotone(
    const LatticeLayout& layout, double x0, const CoefTXY& b, const CoefTXY& h,
    const CoefTX& sigma, const LatticeField* y_nodes, const LatticeField* var_choice,
    const LadderConfig& ladder) {
    LadderReport report;
    const double first =
        ladder.first_level > 0.0 ? ladder.first_level : std::max(std::ceil(b.growth_M), 2.0);
    const double dt = layout.dt();

    LatticeField current;
    double level = first;
    for (std::size_t j = 0; j < std::max<std::size_t>(ladder.max_levels, 1); ++j) {
        const CoefTXY b_level = ladder_level_xy(b, level, ladder.grid);
        LatticeField next =
            forward_on_lattice(layout, x0, b_level, h, sigma, y_nodes, var_choice);
        report.levels.push_back(level);
        if (j > 0) {
            const double delta = field_sup_diff(next, current);
            const double slack = ladder.slack > 0.0
                                     ? ladder.slack
                                     : 10.0 * dt * (1.0 + par::max_abs(next.data));
            const double decrease = field_sup_decrease(current, next);
            report.deltas.push_back(delta);
            report.mono_violations.push_back(decrease);
            if (decrease > slack) {
                throw InvariantError(
                    "forward ladder lost monotonicity by " + std::to_string(decrease) +
                    " (> slack " + std::to_string(slack) +
                    "); a declared monotonicity or growth flag is wrong");
            }
            current = std::move(next);
            if (delta < ladder.tol) {
                report.converged = true;
                break;
            }
        } else {
            current = std::move(next);
            if (b.lipschitz && *b.lipschitz <= level) {
                report.converged = true;
                report.deltas.push_back(0.0);
                report.mono_violations.push_back(0.0);
                break;
            }
        }
        level *= 2.0;
    }
    report.levels_used = report.levels.size();
    return {std::move(current), std::move(report)};
}

void write_forward_csv(const GridProcess& x, const PathBundle& bundle, std::ostream& os) {
    os << "# gsde csv forward v1\n";
    os << "scenario,sample,t,X\n";
    char buf[96];
    for (std::size_t s = 0; s < x.n_scenarios; ++s) {
        for (std::size_t i = 0; i < x.n_samples; ++i) {
            for (std::size_t k = 0; k < x.n_times; ++k) {
                std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g\n", s, i,
                              bundle.grid.time(k), x.at(s, i, k));
                os << buf;
            }
        }
    }
}

} // namespace gsde
