#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "gsde/coeffs.hpp"
#include "gsde/lattice.hpp"
#include "gsde/paths.hpp"

namespace gsde {

/// Process on all grid times per (scenario, sample), bundle-aligned.
struct GridProcess {
    std::size_t n_scenarios = 0;
    std::size_t n_samples = 0;
    std::size_t n_times = 0;
    std::vector<double> v;

    GridProcess() = default;
    GridProcess(std::size_t scen, std::size_t samp, std::size_t times)
        : n_scenarios(scen), n_samples(samp), n_times(times), v(scen * samp * times, 0.0) {}

    double at(std::size_t s, std::size_t i, std::size_t k) const {
        return v[(s * n_samples + i) * n_times + k];
    }
    double& at(std::size_t s, std::size_t i, std::size_t k) {
        return v[(s * n_samples + i) * n_times + k];
    }
    bool aligned_with(const PathBundle& bundle) const {
        return n_scenarios == bundle.n_scenarios() && n_samples == bundle.n_samples &&
               n_times == bundle.path_len();
    }
};

/// Forward G-SDE data: dX = b(t,X,Y) dt + h(t,X,Y) d<B> + sigma(t,X) dB.
struct ForwardSpec {
    double x0 = 0.0;
    CoefTXY b;
    CoefTXY h;
    CoefTX sigma;

    void validate() const;
};

/// Explicit Euler with left-endpoint coefficients, per (scenario, sample).
/// Rejects y-dependent coefficients without a driving process; aborts with the
/// step index on non-finite values.
GridProcess euler_forward(const ForwardSpec& spec, const PathBundle& bundle,
                          const GridProcess* y_input = nullptr);

struct LadderConfig {
    std::size_t max_levels = 8;
    double tol = 1e-6;
    double first_level = 0.0; // 0 -> max(ceil(M), 2)
    GridPolicy grid;
    double slack = 0.0; // monotonicity slack; 0 -> 10*dt*(1+scale)
};

struct LadderReport {
    std::vector<double> levels;
    std::vector<double> deltas;          // sup |X^{k+1} - X^k| between levels
    std::vector<double> mono_violations; // sup (X^k - X^{k+1})^+ between levels
    bool converged = false;
    std::size_t levels_used = 0;
};

/// Monotone construction for continuous non-Lipschitz drift: solves the Euler
/// equation per Lipschitz level b_k; iterates must be nondecreasing in k up to
/// the documented slack, else a monotonicity/growth declaration is flagged.
std::pair<GridProcess, LadderReport> solve_forward_monotone(const ForwardSpec& spec,
                                                            const PathBundle& bundle,
                                                            const LadderConfig& ladder,
                                                            const GridProcess* y_input = nullptr);

/// Dominating process dS = K(1+|S|+|U|) dt + sigma(t,S) dB from the same x0.
GridProcess envelope_forward(double envelope_K, const GridProcess& u_process,
                             const CoefTX& sigma, const PathBundle& bundle, double x0);

/// Discrete Gronwall bound on sup_k |X_k| from the declared growth constant
/// and realized path data; one bound per (scenario, sample).
std::vector<double> gronwall_bound(const ForwardSpec& spec, const PathBundle& bundle,
                                   const GridProcess* y_input = nullptr);

/// Markovian-in-B forward Euler along lattice edges: the value at node
/// (k+1, j) averages the Euler predictions from the reachable predecessor
/// nodes (k, j-1) and (k, j+1). y_nodes supplies the driving process; var
/// supplies the per-node d<B> density for the h-term (required when h != 0).
LatticeField forward_on_lattice(const LatticeLayout& layout, double x0, const CoefTXY& b,
                                const CoefTXY& h, const CoefTX& sigma,
                                const LatticeField* y_nodes,
                                const LatticeField* var_choice);

std::pair<LatticeField, LadderReport> forward_on_lattice_monotone(
    const LatticeLayout& layout, double x0, const CoefTXY& b, const CoefTXY& h,
    const CoefTX& sigma, const LatticeField* y_nodes, const LatticeField* var_choice,
    const LadderConfig& ladder);

/// CSV dump, columns scenario,sample,t,X.
void write_forward_csv(const GridProcess& x, const PathBundle& bundle, std::ostream& os);

} // namespace gsde
