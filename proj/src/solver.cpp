#include "gsde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "gsde/errors.hpp"
#include "gsde/par.hpp"

namespace gsde {

namespace {

void probe_monotone_txy(const CoefTXY& c, const char* name) {
    if (c.is_zero || !c.uses_y) return;
    for (int p = 0; p < 16; ++p) {
        const double t = 0.07 * p;
        const double x = -3.0 + 0.4 * p;
        const double y = -2.0 + 0.25 * p;
        if (c(t, x, y + 0.5) < c(t, x, y) - 1e-9) {
            throw InvariantError(std::string(name) +
                                 " declared nondecreasing in y but decreases at a probe point");
        }
    }
}

void probe_monotone_4(const Coef4& c, const char* name) {
    if (c.is_zero) return;
    for (int p = 0; p < 16; ++p) {
        const double t = 0.07 * p;
        const double x = -3.0 + 0.4 * p;
        const double y = -2.0 + 0.25 * p;
        const double z = -1.0 + 0.13 * p;
        if (c(t, x + 0.5, y, z) < c(t, x, y, z) - 1e-9) {
            throw InvariantError(std::string(name) +
                                 " declared nondecreasing in x but decreases at a probe point");
        }
    }
}

} // namespace

void CoupledProblem::validate() const {
    if (!(horizon > 0.0)) throw ConfigError("problem horizon must be positive");
    if (!terminal || !barrier) throw ConfigError("problem needs terminal and barrier");
    if (!b.fn || !h.fn || !sigma.fn || !f.fn || !g.fn) {
        throw ConfigError("problem needs all coefficients (use zero)");
    }
    if (!(envelope_K >= growth_M)) {
        throw ConfigError("envelope constant K = " + std::to_string(envelope_K) +
                          " must be >= the growth constant M = " + std::to_string(growth_M));
    }
    if (!b.monotone_in_y || !h.monotone_in_y) {
        throw ConfigError("b and h must be declared nondecreasing in y");
    }
    if (!f.monotone_in_x || !g.monotone_in_x) {
        throw ConfigError("f and g must be declared nondecreasing in x");
    }
    probe_monotone_txy(b, "b");
    probe_monotone_txy(h, "h");
    probe_monotone_4(f, "f");
    probe_monotone_4(g, "g");
}

LatticeParams SolveConfig::lattice_params(const CoupledProblem& problem) const {
    LatticeParams p;
    p.horizon = problem.horizon;
    p.n_steps = n_steps;
    p.x0 = problem.x0;
    p.width_sigmas = width_sigmas;
    p.stability = stability;
    return p;
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
double field_min_gap(const LatticeField& hi, const LatticeField& lo) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hi.data.size(); ++i) m = std::min(m, hi.data[i] - lo.data[i]);
    return m;
}

double z_norm_of(const LatticeLayout& layout, const LatticeField& z) {
    LatticeField inc(layout.grid.n_times(), layout.n_nodes);
    for (std::size_t k = 0; k + 1 < layout.grid.n_times(); ++k) {
        const double dt = layout.grid.dt(k);
        for (std::size_t j = 0; j < layout.n_nodes; ++j) {
            const double v = z.at(k, j);
            inc.at(k, j) = v * v * dt;
        }
    }
    return expected_path_sum(layout, inc);
}

LatticeField barrier_field(const LatticeLayout& layout,
                           const std::function<double(double, double)>& barrier) {
    LatticeField l(layout.grid.n_times(), layout.n_nodes);
    for (std::size_t k = 0; k < layout.grid.n_times(); ++k) {
        const double t = layout.grid.time(k);
        for (std::size_t j = 0; j < layout.n_nodes; ++j) l.at(k, j) = barrier(t, layout.x(j));
    }
    return l;
}

} // namespace

std::pair<SolutionQuadruple, IterationReport> solve_rfbgsde(const CoupledProblem& problem_in,
                                                            const SolveConfig& config) {
    const CoupledProblem problem =
        problem_in.terminal_transform
            ? apply_terminal_transform(problem_in, *problem_in.terminal_transform)
            : problem_in;
    problem.validate();
    config.band.validate();
    const LatticeLayout layout = make_layout(config.lattice_params(problem), config.band);
    const double dt = layout.dt();

    // Inner error must not mask outer monotonicity.
    LadderConfig ladder = config.ladder;
    ladder.tol = std::min(ladder.tol > 0.0 ? ladder.tol : 1e-6, config.tol / 10.0);

    // Step 1: starting point Y^0 and upper envelope U.
    auto [y0_sol, u_sol] = envelope_pair(problem.envelope_K, problem.terminal, problem.barrier,
                                         problem.barrier_bound, layout, config.backward);

    // Step 2: X^0 from the b-ladder driven by Y^0.
    auto [x_prev, x0_ladder] = forward_on_lattice_monotone(
        layout, problem.x0, problem.b, problem.h, problem.sigma, &y0_sol.y,
        &y0_sol.var_choice, ladder);

    // Dominating forward envelope S driven by U.
    CoefTXY env_drift;
    const double k_env = problem.envelope_K;
    env_drift.fn = [k_env](double, double s, double u) {
        return k_env * (1.0 + std::fabs(s) + std::fabs(u));
    };
    env_drift.growth_M = k_env;
    env_drift.lipschitz = k_env;
    env_drift.uses_y = true;
    const LatticeField s_field = forward_on_lattice(layout, problem.x0, env_drift,
                                                    zero_coef_txy(), problem.sigma, &u_sol.y,
                                                    nullptr);

    const LatticeField l_field = barrier_field(layout, problem.barrier);

    BackwardSpec backward;
    backward.terminal = problem.terminal;
    backward.barrier = problem.barrier;
    backward.barrier_bound = problem.barrier_bound;
    backward.growth_K = problem.envelope_K;
    backward.driver_f = problem.f;
    backward.driver_g = problem.g;

    IterationReport report;
    SolutionQuadruple out;
    out.layout = layout;
    out.envelope_s = s_field;
    out.envelope_u = u_sol.y;
    out.y_start = y0_sol.y;

    LatticeField y_prev = y0_sol.y;
    LatticeBackwardSolution y_sol;
    LatticeField x_cur;
    for (std::size_t n = 1; n <= config.max_outer + 1; ++n) {
        // Backward solve with the driver's x frozen at X^{n-1}.
        auto [back_sol, back_ladder] =
            solve_rbsde_ladder(backward, layout, config.backward, ladder, &x_prev);
        // Forward solve driven by Y^n.
        auto [x_next, fwd_ladder] = forward_on_lattice_monotone(
            layout, problem.x0, problem.b, problem.h, problem.sigma, &back_sol.y,
            &back_sol.var_choice, ladder);

        IterationRow row;
        row.n = n;
        row.delta_x = field_sup_diff(x_next, x_prev);
        row.delta_y = field_sup_diff(back_sol.y, y_prev);
        row.mono_violation_x = field_sup_decrease(x_prev, x_next);
        row.mono_violation_y = field_sup_decrease(y_prev, back_sol.y);
        row.margin_s = field_min_gap(s_field, x_next);
        row.margin_u = field_min_gap(u_sol.y, back_sol.y);
        row.margin_l = field_min_gap(back_sol.y, l_field);
        row.defect = martingale_defect(back_sol, backward).defect;
        row.z_norm = z_norm_of(layout, back_sol.z);
        report.rows.push_back(row);
        if (report.rows.size() == 1) report.z_norm_first = row.z_norm;
        report.z_norm_max = std::max(report.z_norm_max, row.z_norm);

        const double scale = std::max(par::max_abs(x_next.data), par::max_abs(back_sol.y.data));
        const double slack = config.slack_multiplier * dt * (1.0 + scale);
        if (row.mono_violation_x > slack || row.mono_violation_y > slack) {
            throw InvariantError(
                "monotone chain violated beyond slack at outer iteration " + std::to_string(n) +
                "; a declared monotonicity flag is wrong");
        }
        if (row.margin_s < -slack || row.margin_u < -slack) {
            throw InvariantError("envelope breached at outer iteration " + std::to_string(n) +
                                 "; the envelope constant K underestimates the true growth");
        }

        const bool settled = n >= 2 && std::max(row.delta_x, row.delta_y) < config.tol;
        y_sol = std::move(back_sol);
        y_prev = y_sol.y;
        x_cur = std::move(x_next);
        if (settled) {
            report.converged = true;
            report.converged_at = n - 1;
            break;
        }
        x_prev = x_cur;
    }

    out.x = std::move(x_cur);
    out.y = y_sol.y;
    out.z = y_sol.z;
    out.da = y_sol.da;
    out.var_choice = y_sol.var_choice;
    out.defect = martingale_defect(y_sol, backward);
    return {std::move(out), std::move(report)};
}

ResidualReport residual_check(const CoupledProblem& problem, const SolveConfig& config,
                              const SolutionQuadruple& solution) {
    const LatticeLayout& layout = solution.layout;
    const std::size_t n_layers = layout.grid.n_times();
    const std::size_t n = layout.n_nodes;
    const bool has_h = !problem.h.is_zero;
    const bool has_g = !problem.g.is_zero;

    ResidualReport report;

    // Forward equation replay.
    for (std::size_t k = 0; k + 1 < n_layers; ++k) {
        const double t = layout.grid.time(k);
        const double dt = layout.grid.dt(k);
        auto prediction = [&](std::size_t p, double target_x) {
            const double xp = solution.x.at(k, p);
            const double yp = solution.y.at(k, p);
            double v = xp + problem.b(t, xp, yp) * dt +
                       problem.sigma(t, xp) * (target_x - layout.x(p));
            if (has_h) v += problem.h(t, xp, yp) * solution.var_choice.at(k, p) * dt;
            return v;
        };
        for (std::size_t j = 0; j < n; ++j) {
            const double xj = layout.x(j);
            double replay;
            if (j == 0) {
                replay = prediction(j + 1, xj);
            } else if (j + 1 == n) {
                replay = prediction(j - 1, xj);
            } else {
                replay = 0.5 * (prediction(j - 1, xj) + prediction(j + 1, xj));
            }
            report.forward_sup =
                std::max(report.forward_sup, std::fabs(solution.x.at(k + 1, j) - replay));
        }
    }

    // Backward equation replay with the solution's own Z and dA.
    std::vector<double> estep(n);
    std::vector<double> var(n);
    const double contact_tol =
        config.backward.contact_tol > 0.0 ? config.backward.contact_tol : 2.0 * layout.dx;
    const int passes = config.backward.picard_passes > 0
                           ? config.backward.picard_passes
                           : (layout.dt() > 0.01 + 1e-9 ? 2 : 1);
    report.reflection_min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = n_layers - 1; k-- > 0;) {
        const double t = layout.grid.time(k);
        const double dt = layout.grid.dt(k);
        gheat_step(solution.y.layer(k + 1), estep, layout.band, dt, layout.dx, var);
        for (std::size_t j = 0; j < n; ++j) {
            const double z = solution.z.at(k, j);
            const double x_state = solution.x.at(k, j);
            double y_acc = estep[j];
            for (int p = 0; p < passes; ++p) {
                double v = estep[j] + dt * problem.f(t, x_state, y_acc, z);
                if (has_g) v += var[j] * dt * problem.g(t, x_state, y_acc, z);
                y_acc = v;
            }
            const double replay = y_acc + solution.da.at(k, j);
            report.backward_sup =
                std::max(report.backward_sup, std::fabs(solution.y.at(k, j) - replay));

            const double gap = solution.y.at(k, j) - problem.barrier(t, layout.x(j));
            report.reflection_min_gap = std::min(report.reflection_min_gap, gap);
            if (gap > contact_tol) {
                report.inactive_a_max = std::max(report.inactive_a_max, solution.da.at(k, j));
            }
        }
    }

    BackwardSpec spec;
    spec.terminal = problem.terminal;
    spec.barrier = problem.barrier;
    spec.barrier_bound = problem.barrier_bound;
    spec.driver_f = problem.f;
    spec.driver_g = problem.g;
    LatticeBackwardSolution view;
    view.layout = layout;
    view.y = solution.y;
    view.z = solution.z;
    view.da = solution.da;
    view.var_choice = solution.var_choice;
    report.defect = martingale_defect(view, spec);
    return report;
}

CoupledProblem apply_terminal_transform(const CoupledProblem& problem,
                                        const TerminalTransform& transform) {
    if (!transform.phi) throw ConfigError("terminal transform needs a function");
    if (!(transform.bound > 0.0) || !std::isfinite(transform.bound)) {
        throw ConfigError("terminal transform needs a positive finite declared bound");
    }
    // Probe boundedness and monotonicity of Phi on a fixed value range.
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 256; ++i) {
        const double v = -10.0 + 20.0 * i / 256.0;
        const double pv = transform.phi(v);
        if (!(std::fabs(pv) <= transform.bound + 1e-12)) {
            throw ConfigError("terminal transform violates its declared bound at value " +
                              std::to_string(v));
        }
        if (pv < prev - 1e-12) {
            throw ConfigError("terminal transform is not nondecreasing at value " +
                              std::to_string(v));
        }
        prev = pv;
    }
    // Audit Phi(xi) >= L_T on the probe range of terminal states.
    const double radius = std::fabs(problem.x0) + 8.0;
    for (int i = 0; i <= 256; ++i) {
        const double x = problem.x0 - radius + 2.0 * radius * i / 256.0;
        const double txi = transform.phi(problem.terminal(x));
        const double l = problem.barrier(problem.horizon, x);
        if (txi < l - 1e-12) {
            throw InvariantError("transformed terminal falls below the barrier at x = " +
                                 std::to_string(x));
        }
    }
    CoupledProblem out = problem;
    const auto xi = problem.terminal;
    const auto phi = transform.phi;
    out.terminal = [xi, phi](double x) { return phi(xi(x)); };
    out.terminal_transform.reset();
    return out;
}

void write_solution_csv(const SolutionQuadruple& solution, std::ostream& os) {
    os << "# gsde csv rfbsde v1\n";
    os << "t,x,X,Y,Z,dA\n";
    char buf[160];
    const LatticeLayout& lay = solution.layout;
    for (std::size_t k = 0; k < lay.grid.n_times(); ++k) {
        for (std::size_t j = 0; j < lay.n_nodes; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          lay.grid.time(k), lay.x(j), solution.x.at(k, j), solution.y.at(k, j),
                          solution.z.at(k, j), solution.da.at(k, j));
            os << buf;
        }
    }
}

void write_iteration_csv(const IterationReport& report, std::ostream& os) {
    os << "# gsde csv iterations v1\n";
    os << "iteration,delta_x,delta_y,defect,z_norm\n";
    char buf[160];
    for (const IterationRow& row : report.rows) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", row.n, row.delta_x,
                      row.delta_y, row.defect, row.z_norm);
        os << buf;
    }
}

void write_iteration_report(const IterationReport& report, std::ostream& os) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "converged: %s\n", report.converged ? "true" : "false");
    os << buf;
    std::snprintf(buf, sizeof(buf), "converged_at: %zu\n", report.converged_at);
    os << buf;
    std::snprintf(buf, sizeof(buf), "z_norm_first: %.17g\n", report.z_norm_first);
    os << buf;
    std::snprintf(buf, sizeof(buf), "z_norm_max: %.17g\n", report.z_norm_max);
    os << buf;
    for (const IterationRow& row : report.rows) {
        std::snprintf(buf, sizeof(buf),
                      "iter %zu: delta_x=%.6g delta_y=%.6g mono_x=%.3g mono_y=%.3g "
                      "margin_s=%.6g margin_u=%.6g margin_l=%.6g defect=%.3g z_norm=%.6g\n",
                      row.n, row.delta_x, row.delta_y, row.mono_violation_x,
                      row.mono_violation_y, row.margin_s, row.margin_u, row.margin_l,
                      row.defect, row.z_norm);
        os << buf;
    }
}

} // namespace gsde
