#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "gsde/coeffs.hpp"
#include "gsde/forward.hpp"
#include "gsde/lattice.hpp"
#include "gsde/paths.hpp"

namespace gsde {

/// Reflected backward problem data. terminal and barrier are functions of the
/// B-state (lattice coordinate or simulated path value); drivers see x_input
/// where supplied, otherwise the B-state itself.
struct BackwardSpec {
    std::function<double(double)> terminal;          // xi(state)
    Coef4 driver_f;                                  // ds driver
    Coef4 driver_g;                                  // d<B> driver
    std::function<double(double, double)> barrier;   // L(t, state)
    double barrier_bound = 0.0;                      // c with L <= c everywhere
    double growth_K = 0.0;                           // envelope growth constant

    void validate() const;
};

struct BackwardConfig {
    int picard_passes = 0;    // 0 -> 2 when dt > 0.01, else 1
    double contact_tol = 0.0; // 0 -> 2*dx
};

/// Lattice-backend solution: per-node Y, Z, per-step reflection increments dA
/// (A itself accumulates path-wise), and the per-node variance attaining each
/// G-step maximum (needed to replay d<B>-weighted terms).
struct LatticeBackwardSolution {
    LatticeLayout layout;
    LatticeField y;
    LatticeField z;          // layers 0..N-1 meaningful
    LatticeField da;         // reflection increment at (k, j); layer N holds terminal clips
    LatticeField var_choice; // sigma*^2 per (k, j), layers 0..N-1
    double expected_a_total = 0.0; // E^[A_T]
    double terminal_clip_max = 0.0;
    double terminal_barrier_margin = 0.0; // min over terminal nodes of xi - L_T

    double root() const { return y.at(0, layout.root()); }
};

/// Backward induction with nodewise reflection: one G-step, the implicit y
/// resolved by Picard passes, then Y = max(y~, L) with dA absorbing the gap
/// (discrete Snell construction, exact discrete complementarity).
LatticeBackwardSolution solve_rbsde_lattice(const BackwardSpec& spec,
                                            const LatticeLayout& layout,
                                            const BackwardConfig& config = {},
                                            const LatticeField* x_input = nullptr);

/// Ladder wrapper for continuous non-Lipschitz drivers: solves per Lipschitz
/// level, audits the monotone chain, stops when successive levels agree.
std::pair<LatticeBackwardSolution, LadderReport> solve_rbsde_ladder(
    const BackwardSpec& spec, const LatticeLayout& layout, const BackwardConfig& config,
    const LadderConfig& ladder, const LatticeField* x_input = nullptr);

struct DefectReport {
    double defect = 0.0;       // max_t E^[sum_{k<t} (Y_k - L_k) dA_k]
    double pathwise_sum = 0.0; // upper bound: sum_k sup_nodes (Y_k - L_k) dA_k
};

/// Skorohod-type diagnostic for the non-increasing G-martingale condition;
/// near zero means the complementarity holds.
DefectReport martingale_defect(const LatticeBackwardSolution& solution,
                               const BackwardSpec& spec);

struct RegressionConfig {
    int degree = 2;
    double ridge = 0.0;
};

/// Scenario-backend solution from the penalization cross-check.
struct ScenarioBackwardSolution {
    TimeGrid grid;
    std::size_t n_scenarios = 0;
    std::size_t n_samples = 0;
    GridProcess y;
    StepProcess z;
    StepProcess da;
    std::vector<double> y0_per_scenario;
    double y0 = 0.0; // family max at t = 0
    int rank_deficiencies = 0;
};

/// Classical penalized BSDE per scenario (driver + (1/eps)(y - L)^-), solved by
/// backward least-squares regression on path samples. Serves as an independent
/// check of the lattice backend.
ScenarioBackwardSolution solve_rbsde_penalized(const BackwardSpec& spec,
                                               const PathBundle& bundle, double epsilon,
                                               const RegressionConfig& regression = {},
                                               const GridProcess* x_input = nullptr);

DefectReport martingale_defect(const ScenarioBackwardSolution& solution,
                               const BackwardSpec& spec, const PathBundle& bundle);

/// Starting point and upper envelope: the two reflected G-BSDEs with drivers
/// -K(1+|y|+|z|) (terminal xi) and +K(1+|u|+|v|) (terminal |xi|). Checks the
/// lower solution stays below the upper one nodewise.
std::pair<LatticeBackwardSolution, LatticeBackwardSolution> envelope_pair(
    double envelope_K, const std::function<double(double)>& terminal,
    const std::function<double(double, double)>& barrier, double barrier_bound,
    const LatticeLayout& layout, const BackwardConfig& config = {});

/// CSV dump, columns t,x,Y,Z,dA.
void write_backward_csv(const LatticeBackwardSolution& solution, std::ostream& os);

/// Diagnostic report as key: value lines.
void write_backward_report(const LatticeBackwardSolution& solution, const DefectReport& defect,
                           std::ostream& os);

} // namespace gsde
