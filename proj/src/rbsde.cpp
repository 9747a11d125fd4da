#include "gsde/rbsde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "gsde/errors.hpp"
#include "gsde/par.hpp"

namespace gsde {

void BackwardSpec::validate() const {
    if (!terminal) throw ConfigError("backward spec needs a terminal function");
    if (!barrier) throw ConfigError("backward spec needs a barrier function");
    if (!driver_f.fn || !driver_g.fn) {
        throw ConfigError("backward spec needs drivers (use zero)");
    }
    if (!std::isfinite(barrier_bound)) {
        throw ConfigError("barrier upper bound must be finite");
    }
}

namespace {

// One decision per solve; per-layer dt values wobble by an ulp on uniform
// grids and must not flip the pass count between layers.
int effective_passes(const BackwardConfig& config, double dt) {
    if (config.picard_passes > 0) return config.picard_passes;
    return dt > 0.01 + 1e-9 ? 2 : 1;
}

void check_barrier_bound(double l_value, double bound, double t) {
    if (l_value > bound + 1e-9) {
        throw InvariantError("barrier exceeds its declared upper bound c at t = " +
                             std::to_string(t));
    }
}

} // namespace

LatticeBackwardSolution solve_rbsde_lattice(const BackwardSpec& spec,
                                            const LatticeLayout& layout,
                                            const BackwardConfig& config,
                                            const LatticeField* x_input) {
    spec.validate();
    layout.validate();
    if (!spec.driver_f.lipschitz || (!spec.driver_g.is_zero && !spec.driver_g.lipschitz)) {
        throw ConfigError("driver has no declared Lipschitz constant; run the ladder "
                          "(solve_rbsde_ladder) for merely continuous drivers");
    }
    const std::size_t n_layers = layout.grid.n_times();
    const std::size_t n = layout.n_nodes;
    if (x_input && (x_input->n_layers != n_layers || x_input->n_nodes != n)) {
        throw ConfigError("x_input field does not match the lattice layout");
    }

    LatticeBackwardSolution sol;
    sol.layout = layout;
    sol.y = LatticeField(n_layers, n);
    sol.z = LatticeField(n_layers, n);
    sol.da = LatticeField(n_layers, n);
    sol.var_choice = LatticeField(n_layers, n);

    // Terminal layer: Y_N = max(xi, L_T). Reflecting at the horizon keeps
    // Y >= L when the supplied terminal dips below the barrier; the clip
    // magnitude is reported so a terminal value below the barrier stays visible.
    const double t_end = layout.grid.horizon();
    sol.terminal_barrier_margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const double xj = layout.x(j);
        const double xi = spec.terminal(xj);
        const double l = spec.barrier(t_end, xj);
        check_barrier_bound(l, spec.barrier_bound, t_end);
        if (!std::isfinite(xi)) {
            throw NumericError("terminal value non-finite at x = " + std::to_string(xj));
        }
        sol.terminal_barrier_margin = std::min(sol.terminal_barrier_margin, xi - l);
        const double y = std::max(xi, l);
        sol.y.at(n_layers - 1, j) = y;
        sol.da.at(n_layers - 1, j) = y - xi;
        sol.terminal_clip_max = std::max(sol.terminal_clip_max, y - xi);
    }

    const bool has_g = !spec.driver_g.is_zero;
    const int passes = effective_passes(config, layout.dt());
    std::vector<double> estep(n);
    for (std::size_t k = n_layers - 1; k-- > 0;) {
        const double t = layout.grid.time(k);
        const double dt = layout.grid.dt(k);
        auto y_next = sol.y.layer(k + 1);
        gheat_step(y_next, estep, layout.band, dt, layout.dx, sol.var_choice.layer(k));

        par::parallel_for(static_cast<std::int64_t>(n), [&](std::int64_t ji) {
            const auto j = static_cast<std::size_t>(ji);
            double z;
            if (j == 0) {
                z = (y_next[1] - y_next[0]) / layout.dx;
            } else if (j + 1 == n) {
                z = (y_next[n - 1] - y_next[n - 2]) / layout.dx;
            } else {
                z = (y_next[j + 1] - y_next[j - 1]) / (2.0 * layout.dx);
            }
            sol.z.at(k, j) = z;

            const double x_state = x_input ? x_input->at(k, j) : layout.x(j);
            const double var = sol.var_choice.at(k, j);
            double y_acc = estep[j];
            for (int p = 0; p < passes; ++p) {
                double v = estep[j] + dt * spec.driver_f(t, x_state, y_acc, z);
                if (has_g) v += var * dt * spec.driver_g(t, x_state, y_acc, z);
                y_acc = v;
            }
            const double l = spec.barrier(t, layout.x(j));
            const double y = std::max(y_acc, l);
            sol.y.at(k, j) = y;
            sol.da.at(k, j) = y - y_acc;
        });
        for (std::size_t j = 0; j < n; ++j) {
            check_barrier_bound(spec.barrier(t, layout.x(j)), spec.barrier_bound, t);
            if (!std::isfinite(sol.y.at(k, j))) {
                throw NumericError("backward induction non-finite at layer " +
                                   std::to_string(k));
            }
        }
    }
    sol.expected_a_total = expected_path_sum(layout, sol.da);
    return sol;
}

namespace {
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

std::pair<LatticeBackwardSolution, LadderReport> solve_rbsde_ladder(
    const BackwardSpec& spec, const LatticeLayout& layout, const BackwardConfig& config,
    const LadderConfig& ladder, const LatticeField* x_input) {
    LadderReport report;
    const double growth = std::max(spec.driver_f.growth_M, spec.driver_g.growth_M);
    const double first =
        ladder.first_level > 0.0 ? ladder.first_level : std::max(std::ceil(growth), 2.0);
    const double dt = layout.dt();

    LatticeBackwardSolution current;
    double level = first;
    for (std::size_t j = 0; j < std::max<std::size_t>(ladder.max_levels, 1); ++j) {
        BackwardSpec level_spec = spec;
        level_spec.driver_f = ladder_level_yz(spec.driver_f, level, ladder.grid);
        if (!spec.driver_g.is_zero) {
            level_spec.driver_g = ladder_level_yz(spec.driver_g, level, ladder.grid);
        }
        LatticeBackwardSolution next =
            solve_rbsde_lattice(level_spec, layout, config, x_input);
        report.levels.push_back(level);
        if (j > 0) {
            const double delta = field_sup_diff(next.y, current.y);
            const double slack = ladder.slack > 0.0
                                     ? ladder.slack
                                     : 10.0 * dt * (1.0 + par::max_abs(next.y.data));
            const double decrease = field_sup_decrease(current.y, next.y);
            report.deltas.push_back(delta);
            report.mono_violations.push_back(decrease);
            if (decrease > slack) {
                throw InvariantError("backward ladder lost monotonicity by " +
                                     std::to_string(decrease) + " (> slack " +
                                     std::to_string(slack) + ")");
            }
            current = std::move(next);
            if (delta < ladder.tol) {
                report.converged = true;
                break;
            }
        } else {
            current = std::move(next);
            const bool f_exact = spec.driver_f.lipschitz && *spec.driver_f.lipschitz <= level;
            const bool g_exact = spec.driver_g.is_zero ||
                                 (spec.driver_g.lipschitz && *spec.driver_g.lipschitz <= level);
            if (f_exact && g_exact) {
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

DefectReport martingale_defect(const LatticeBackwardSolution& solution,
                               const BackwardSpec& spec) {
    const LatticeLayout& lay = solution.layout;
    const std::size_t n_layers = lay.grid.n_times();
    LatticeField inc(n_layers, lay.n_nodes);
    DefectReport report;
    for (std::size_t k = 0; k < n_layers; ++k) {
        const double t = lay.grid.time(k);
        double layer_max = 0.0;
        for (std::size_t j = 0; j < lay.n_nodes; ++j) {
            const double gap = solution.y.at(k, j) - spec.barrier(t, lay.x(j));
            const double c = gap * solution.da.at(k, j);
            inc.at(k, j) = c;
            layer_max = std::max(layer_max, c);
        }
        report.pathwise_sum += layer_max;
    }
    report.defect = expected_path_sum(lay, inc);
    return report;
}

namespace {

/// Least-squares fit of targets on a polynomial basis in state; returns fitted
/// values. Falls back to lower degree on rank deficiency.
std::vector<double> regress_fit(std::span<const double> state, std::span<const double> target,
                                int degree, double ridge, int* deficiencies) {
    const std::size_t n = state.size();
    int d = std::max(degree, 0);
    while (d >= 0) {
        const std::size_t m = static_cast<std::size_t>(d) + 1;
        // normal equations G beta = r
        std::vector<double> g(m * m, 0.0);
        std::vector<double> r(m, 0.0);
        std::vector<double> pow_cache(m);
        for (std::size_t i = 0; i < n; ++i) {
            double p = 1.0;
            for (std::size_t a = 0; a < m; ++a) {
                pow_cache[a] = p;
                p *= state[i];
            }
            for (std::size_t a = 0; a < m; ++a) {
                for (std::size_t b = 0; b <= a; ++b) g[a * m + b] += pow_cache[a] * pow_cache[b];
                r[a] += pow_cache[a] * target[i];
            }
        }
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a + 1; b < m; ++b) g[a * m + b] = g[b * m + a];
            g[a * m + a] += ridge;
        }
        // Gaussian elimination with partial pivoting
        std::vector<double> beta = r;
        bool singular = false;
        std::vector<std::size_t> piv(m);
        for (std::size_t a = 0; a < m; ++a) piv[a] = a;
        for (std::size_t col = 0; col < m; ++col) {
            std::size_t best = col;
            for (std::size_t row = col + 1; row < m; ++row) {
                if (std::fabs(g[row * m + col]) > std::fabs(g[best * m + col])) best = row;
            }
            if (std::fabs(g[best * m + col]) < 1e-12 * (1.0 + std::fabs(g[0]))) {
                singular = true;
                break;
            }
            if (best != col) {
                for (std::size_t c2 = 0; c2 < m; ++c2) std::swap(g[best * m + c2], g[col * m + c2]);
                std::swap(beta[best], beta[col]);
            }
            for (std::size_t row = col + 1; row < m; ++row) {
                const double factor = g[row * m + col] / g[col * m + col];
                for (std::size_t c2 = col; c2 < m; ++c2) g[row * m + c2] -= factor * g[col * m + c2];
                beta[row] -= factor * beta[col];
            }
        }
        if (!singular) {
            for (std::size_t col = m; col-- > 0;) {
                for (std::size_t c2 = col + 1; c2 < m; ++c2) beta[col] -= g[col * m + c2] * beta[c2];
                beta[col] /= g[col * m + col];
            }
            std::vector<double> fitted(n);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                double p = 1.0;
                for (std::size_t a = 0; a < m; ++a) {
                    acc += beta[a] * p;
                    p *= state[i];
                }
                fitted[i] = acc;
            }
            return fitted;
        }
        ++(*deficiencies);
        --d;
    }
    // degree < 0: plain mean
    std::vector<double> fitted(n, par::mean(target));
    return fitted;
}

} // namespace

ScenarioBackwardSolution solve_rbsde_penalized(const BackwardSpec& spec,
                                               const PathBundle& bundle, double epsilon,
                                               const RegressionConfig& regression,
                                               const GridProcess* x_input) {
    spec.validate();
    if (!(epsilon > 0.0)) throw ConfigError("penalization requires epsilon > 0");
    if (x_input && !x_input->aligned_with(bundle)) {
        throw ConfigError("x_input process does not match the path bundle");
    }

    const std::size_t n_scen = bundle.n_scenarios();
    const std::size_t n_samples = bundle.n_samples;
    const std::size_t n_steps = bundle.grid.n_steps();
    const double t_end = bundle.grid.horizon();

    ScenarioBackwardSolution sol;
    sol.grid = bundle.grid;
    sol.n_scenarios = n_scen;
    sol.n_samples = n_samples;
    sol.y = GridProcess(n_scen, n_samples, bundle.path_len());
    sol.z = StepProcess{n_scen, n_samples, n_steps,
                        std::vector<double>(n_scen * n_samples * std::max<std::size_t>(n_steps, 1), 0.0)};
    sol.da = StepProcess{n_scen, n_samples, n_steps,
                         std::vector<double>(n_scen * n_samples * std::max<std::size_t>(n_steps, 1), 0.0)};
    sol.y0_per_scenario.assign(n_scen, 0.0);

    const bool has_g = !spec.driver_g.is_zero;
    const int passes = n_steps > 0 ? effective_passes(BackwardConfig{}, bundle.grid.dt(0)) : 1;
    int deficiencies = 0;
    for (std::size_t s = 0; s < n_scen; ++s) {
        std::vector<double> y_next(n_samples);
        for (std::size_t i = 0; i < n_samples; ++i) {
            const double bt = bundle.b_at(s, i, n_steps);
            const double v = std::max(spec.terminal(bt), spec.barrier(t_end, bt));
            y_next[i] = v;
            sol.y.at(s, i, n_steps) = v;
        }
        std::vector<double> state(n_samples), zt(n_samples);
        for (std::size_t k = n_steps; k-- > 0;) {
            const double t = bundle.grid.time(k);
            const double dt = bundle.grid.dt(k);
            const double dqv = bundle.dqv(s, k);
            for (std::size_t i = 0; i < n_samples; ++i) {
                state[i] = bundle.b_at(s, i, k);
                zt[i] = y_next[i] * (bundle.b_at(s, i, k + 1) - bundle.b_at(s, i, k)) / dqv;
            }
            std::vector<double> cont;
            std::vector<double> zfit;
            if (k == 0) {
                cont.assign(n_samples, par::mean(y_next));
                zfit.assign(n_samples, par::mean(zt));
            } else {
                cont = regress_fit(state, y_next, regression.degree, regression.ridge,
                                   &deficiencies);
                zfit = regress_fit(state, zt, regression.degree, regression.ridge,
                                   &deficiencies);
            }
            for (std::size_t i = 0; i < n_samples; ++i) {
                const double x_state = x_input ? x_input->at(s, i, k) : state[i];
                double y_acc = cont[i];
                for (int p = 0; p < passes; ++p) {
                    double v = cont[i] + dt * spec.driver_f(t, x_state, y_acc, zfit[i]);
                    if (has_g) v += dqv * spec.driver_g(t, x_state, y_acc, zfit[i]);
                    y_acc = v;
                }
                const double l = spec.barrier(t, state[i]);
                check_barrier_bound(l, spec.barrier_bound, t);
                const double penalty = (dt / epsilon) * std::max(l - y_acc, 0.0);
                const double y = y_acc + penalty;
                sol.y.at(s, i, k) = y;
                sol.z.at(s, i, k) = zfit[i];
                sol.da.at(s, i, k) = penalty;
                y_next[i] = y;
            }
        }
        sol.y0_per_scenario[s] = par::mean(y_next);
    }
    sol.rank_deficiencies = deficiencies;
    sol.y0 = par::max_value(sol.y0_per_scenario);
    return sol;
}

DefectReport martingale_defect(const ScenarioBackwardSolution& solution,
                               const BackwardSpec& spec, const PathBundle& bundle) {
    DefectReport report;
    double family_max = 0.0;
    double pathwise = 0.0;
    for (std::size_t s = 0; s < solution.n_scenarios; ++s) {
        std::vector<double> per_sample(solution.n_samples, 0.0);
        for (std::size_t i = 0; i < solution.n_samples; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < solution.z.n_steps; ++k) {
                const double gap =
                    solution.y.at(s, i, k) - spec.barrier(solution.grid.time(k),
                                                          bundle.b_at(s, i, k));
                acc += gap * solution.da.at(s, i, k);
            }
            per_sample[i] = acc;
            pathwise = std::max(pathwise, acc);
        }
        family_max = std::max(family_max, par::mean(per_sample));
    }
    report.defect = family_max;
    report.pathwise_sum = pathwise;
    return report;
}

std::pair<LatticeBackwardSolution, LatticeBackwardSolution> envelope_pair(
    double envelope_K, const std::function<double(double)>& terminal,
    const std::function<double(double, double)>& barrier, double barrier_bound,
    const LatticeLayout& layout, const BackwardConfig& config) {
    if (!(envelope_K >= 0.0)) throw ConfigError("envelope constant K must be >= 0");

    BackwardSpec lower;
    lower.terminal = terminal;
    lower.barrier = barrier;
    lower.barrier_bound = barrier_bound;
    lower.growth_K = envelope_K;
    lower.driver_g = zero_coef4();
    lower.driver_f.fn = [envelope_K](double, double, double y, double z) {
        return -envelope_K * (1.0 + std::fabs(y) + std::fabs(z));
    };
    lower.driver_f.growth_M = envelope_K;
    lower.driver_f.lipschitz = envelope_K * std::sqrt(2.0);

    BackwardSpec upper = lower;
    upper.terminal = [terminal](double x) { return std::fabs(terminal(x)); };
    upper.driver_f.fn = [envelope_K](double, double, double y, double z) {
        return envelope_K * (1.0 + std::fabs(y) + std::fabs(z));
    };

    LatticeBackwardSolution y0 = solve_rbsde_lattice(lower, layout, config);
    LatticeBackwardSolution u = solve_rbsde_lattice(upper, layout, config);

    const double slack = 10.0 * layout.dt() * (1.0 + par::max_abs(u.y.data));
    const double breach = field_sup_decrease(y0.y, u.y);
    if (breach > slack) {
        throw InvariantError("envelope ordering Y0 <= U violated by " + std::to_string(breach));
    }
    return {std::move(y0), std::move(u)};
}

void write_backward_csv(const LatticeBackwardSolution& solution, std::ostream& os) {
    os << "# gsde csv rbsde v1\n";
    os << "t,x,Y,Z,dA\n";
    char buf[128];
    const LatticeLayout& lay = solution.layout;
    for (std::size_t k = 0; k < lay.grid.n_times(); ++k) {
        for (std::size_t j = 0; j < lay.n_nodes; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          lay.grid.time(k), lay.x(j), solution.y.at(k, j),
                          solution.z.at(k, j), solution.da.at(k, j));
            os << buf;
        }
    }
}

void write_backward_report(const LatticeBackwardSolution& solution, const DefectReport& defect,
                           std::ostream& os) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "root_value: %.17g\n", solution.root());
    os << buf;
    std::snprintf(buf, sizeof(buf), "expected_a_total: %.17g\n", solution.expected_a_total);
    os << buf;
    std::snprintf(buf, sizeof(buf), "terminal_clip_max: %.17g\n", solution.terminal_clip_max);
    os << buf;
    std::snprintf(buf, sizeof(buf), "terminal_barrier_margin: %.17g\n",
                  solution.terminal_barrier_margin);
    os << buf;
    std::snprintf(buf, sizeof(buf), "martingale_defect: %.17g\n", defect.defect);
    os << buf;
    std::snprintf(buf, sizeof(buf), "pathwise_complementarity: %.17g\n", defect.pathwise_sum);
    os << buf;
}

} // namespace gsde
