#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "gsde/rbsde.hpp"

namespace gsde {

/// Declared continuous bounded nondecreasing terminal transform.
struct TerminalTransform {
    std::function<double(double)> phi;
    double bound = 0.0;
};

/// Coupled reflected forward-backward problem on one volatility band:
///   X = x0 + int b(s,X,Y) ds + int h(s,X,Y) d<B> + int sigma(s,X) dB
///   Y = xi(B_T) + int f(s,X,Y,Z) ds + int g(s,X,Y,Z) d<B> - int Z dB + A_T - A_t
///   Y >= L, with A enforcing the reflection.
struct CoupledProblem {
    double x0 = 0.0;
    double horizon = 1.0;
    CoefTXY b;
    CoefTXY h;
    CoefTX sigma;
    Coef4 f;
    Coef4 g;
    std::function<double(double)> terminal;
    std::function<double(double, double)> barrier;
    double barrier_bound = 0.0;
    double growth_M = 0.0;   // joint growth constant of the coefficients
    double envelope_K = 0.0; // >= growth_M
    std::optional<TerminalTransform> terminal_transform;

    /// Declaration checks plus monotonicity spot probes on the declared flags.
    void validate() const;
};

struct SolveConfig {
    VolatilityBand band;
    std::size_t n_steps = 100;
    double width_sigmas = 6.0;
    double stability = 0.5;
    double tol = 1e-5;
    std::size_t max_outer = 20;
    LadderConfig ladder;      // inner ladder; tol defaults to tol/10 when 0
    BackwardConfig backward;
    double slack_multiplier = 10.0;

    LatticeParams lattice_params(const CoupledProblem& problem) const;
};

struct IterationRow {
    std::size_t n = 0;
    double delta_x = 0.0;
    double delta_y = 0.0;
    double mono_violation_x = 0.0; // sup (X^{n-1} - X^n)^+
    double mono_violation_y = 0.0;
    double margin_s = 0.0; // min (S - X^n)
    double margin_u = 0.0; // min (U - Y^n)
    double margin_l = 0.0; // min (Y^n - L)
    double defect = 0.0;
    double z_norm = 0.0; // E^[sum |Z_k|^2 dt]
};

struct IterationReport {
    std::vector<IterationRow> rows;
    bool converged = false;
    std::size_t converged_at = 0; // outer iterations until successive iterates agree
    double z_norm_first = 0.0;
    double z_norm_max = 0.0;
};

struct SolutionQuadruple {
    LatticeLayout layout;
    LatticeField x;
    LatticeField y;
    LatticeField z;
    LatticeField da;
    LatticeField var_choice;
    LatticeField envelope_s;
    LatticeField envelope_u;
    LatticeField y_start; // Y^0 from the envelope equation
    DefectReport defect;

    double root_x() const { return x.at(0, layout.root()); }
    double root_y() const { return y.at(0, layout.root()); }
};

/// Monotone iteration: envelopes (Y^0, U), then X^0, then S, then alternating
/// reflected-backward / forward solves with the driver's x frozen at the
/// previous forward iterate. Stops when successive iterates agree within tol;
/// non-convergence within max_outer is a reported outcome, not an error.
/// Monotone-chain or envelope breaches beyond the documented slack throw
/// InvariantError (they flag wrong monotonicity or growth declarations).
std::pair<SolutionQuadruple, IterationReport> solve_rfbgsde(const CoupledProblem& problem,
                                                            const SolveConfig& config);

struct ResidualReport {
    double forward_sup = 0.0;
    double backward_sup = 0.0;
    double reflection_min_gap = 0.0;  // min (Y - L), >= 0 expected
    double inactive_a_max = 0.0;      // max dA off the contact set
    DefectReport defect;
};

/// Replays both discrete integral equations from the solution's own
/// (X, Y, Z, A) and reports sup-norm residuals.
ResidualReport residual_check(const CoupledProblem& problem, const SolveConfig& config,
                              const SolutionQuadruple& solution);

/// Returns the problem with terminal Phi(xi). Audits boundedness and
/// monotonicity of Phi (ConfigError) and Phi(xi) >= L_T (InvariantError).
CoupledProblem apply_terminal_transform(const CoupledProblem& problem,
                                        const TerminalTransform& transform);

/// CSV dump of the solution surfaces, columns t,x,X,Y,Z,dA.
void write_solution_csv(const SolutionQuadruple& solution, std::ostream& os);

/// CSV dump of the per-iteration report, columns iteration,delta_x,delta_y,defect,z_norm.
void write_iteration_csv(const IterationReport& report, std::ostream& os);

/// Full structured-text report (key: value lines).
void write_iteration_report(const IterationReport& report, std::ostream& os);

} // namespace gsde
