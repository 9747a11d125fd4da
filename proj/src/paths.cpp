#include "gsde/paths.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "gsde/errors.hpp"
#include "gsde/par.hpp"
#include "gsde/rng.hpp"

namespace gsde {

void ScenarioControl::validate(const VolatilityBand& band) const {
    band.validate();
    if (sigma_steps.size() != grid.n_steps()) {
        throw ConfigError("scenario control has " + std::to_string(sigma_steps.size()) +
                          " sigma steps for " + std::to_string(grid.n_steps()) +
                          " grid steps");
    }
    for (std::size_t k = 0; k < sigma_steps.size(); ++k) {
        if (!(sigma_steps[k] >= band.sigma_lo && sigma_steps[k] <= band.sigma_hi)) {
            throw ConfigError("scenario control sigma outside band at step " +
                              std::to_string(k));
        }
    }
}

std::vector<ScenarioControl> bang_bang_family(const TimeGrid& grid, const VolatilityBand& band,
                                              int depth) {
    band.validate();
    if (depth < 1 || depth > 16) {
        throw ConfigError("bang-bang family depth must lie in [1, 16]");
    }
    const std::size_t n_steps = grid.n_steps();
    const auto n_blocks = static_cast<std::size_t>(depth);
    const std::size_t n_controls = band.degenerate() ? 1 : (std::size_t{1} << depth);

    std::vector<ScenarioControl> family;
    family.reserve(n_controls);
    for (std::size_t pattern = 0; pattern < n_controls; ++pattern) {
        ScenarioControl c;
        c.id = (static_cast<std::uint64_t>(depth) << 32) | pattern;
        c.grid = grid;
        c.sigma_steps.resize(n_steps);
        for (std::size_t k = 0; k < n_steps; ++k) {
            const std::size_t block = std::min(k * n_blocks / std::max<std::size_t>(n_steps, 1),
                                               n_blocks - 1);
            const bool high = (pattern >> block) & 1u;
            c.sigma_steps[k] = high ? band.sigma_hi : band.sigma_lo;
        }
        family.push_back(std::move(c));
    }
    return family;
}

PathBundle simulate_paths(const ScenarioControl& control, const VolatilityBand& band,
                          std::size_t n_samples, std::uint64_t seed) {
    return simulate_paths(std::vector<ScenarioControl>{control}, band, n_samples, seed);
}

PathBundle simulate_paths(std::vector<ScenarioControl> family, const VolatilityBand& band,
                          std::size_t n_samples, std::uint64_t seed) {
    if (family.empty()) throw ConfigError("path simulation needs a non-empty scenario family");
    if (n_samples < 1) throw ConfigError("path simulation needs n_samples >= 1");
    for (const ScenarioControl& c : family) {
        c.validate(band);
        if (!c.grid.matches(family.front().grid)) {
            throw ConfigError("scenario family mixes different time grids");
        }
    }

    PathBundle bundle;
    bundle.grid = family.front().grid;
    bundle.band = band;
    bundle.controls = std::move(family);
    bundle.n_samples = n_samples;
    bundle.seed = seed;
    const std::size_t len = bundle.path_len();
    const std::size_t n_scen = bundle.n_scenarios();
    bundle.b.assign(n_scen * n_samples * len, 0.0);
    bundle.qv.assign(n_scen * n_samples * len, 0.0);

    const std::size_t n_steps = bundle.grid.n_steps();
    par::parallel_for(static_cast<std::int64_t>(n_scen * n_samples), [&](std::int64_t idx) {
        const std::size_t s = static_cast<std::size_t>(idx) / n_samples;
        const std::size_t i = static_cast<std::size_t>(idx) % n_samples;
        const ScenarioControl& c = bundle.controls[s];
        const std::size_t off = bundle.offset(s, i);
        double bv = 0.0;
        double qvv = 0.0;
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double dt = bundle.grid.dt(k);
            const double sig = c.sigma_steps[k];
            const double z = rng::normal(seed, c.id, i, k);
            bv += sig * std::sqrt(dt) * z;
            qvv += sig * sig * dt;
            bundle.b[off + k + 1] = bv;
            bundle.qv[off + k + 1] = qvv;
        }
    });
    return bundle;
}

StepProcess adapted_process(const PathBundle& bundle,
                            const std::function<double(double, double)>& fn) {
    StepProcess eta;
    eta.n_scenarios = bundle.n_scenarios();
    eta.n_samples = bundle.n_samples;
    eta.n_steps = bundle.grid.n_steps();
    eta.v.resize(eta.n_scenarios * eta.n_samples * eta.n_steps);
    par::parallel_for(static_cast<std::int64_t>(eta.n_scenarios * eta.n_samples),
                      [&](std::int64_t idx) {
                          const std::size_t s = static_cast<std::size_t>(idx) / eta.n_samples;
                          const std::size_t i = static_cast<std::size_t>(idx) % eta.n_samples;
                          for (std::size_t k = 0; k < eta.n_steps; ++k) {
                              eta.at(s, i, k) = fn(bundle.grid.time(k), bundle.b_at(s, i, k));
                          }
                      });
    return eta;
}

namespace {
void check_alignment(const StepProcess& eta, const PathBundle& bundle) {
    if (eta.n_scenarios != bundle.n_scenarios() || eta.n_samples != bundle.n_samples ||
        eta.n_steps != bundle.grid.n_steps()) {
        throw ConfigError("step process is not aligned with the path bundle grid");
    }
}
} // namespace

std::vector<double> ito_integral(const StepProcess& eta, const PathBundle& bundle) {
    check_alignment(eta, bundle);
    std::vector<double> out(eta.n_scenarios * eta.n_samples, 0.0);
    par::parallel_for(static_cast<std::int64_t>(out.size()), [&](std::int64_t idx) {
        const std::size_t s = static_cast<std::size_t>(idx) / eta.n_samples;
        const std::size_t i = static_cast<std::size_t>(idx) % eta.n_samples;
        double acc = 0.0;
        for (std::size_t k = 0; k < eta.n_steps; ++k) {
            acc += eta.at(s, i, k) * (bundle.b_at(s, i, k + 1) - bundle.b_at(s, i, k));
        }
        out[static_cast<std::size_t>(idx)] = acc;
    });
    return out;
}

std::vector<double> qv_integral(const StepProcess& eta, const PathBundle& bundle) {
    check_alignment(eta, bundle);
    std::vector<double> out(eta.n_scenarios * eta.n_samples, 0.0);
    par::parallel_for(static_cast<std::int64_t>(out.size()), [&](std::int64_t idx) {
        const std::size_t s = static_cast<std::size_t>(idx) / eta.n_samples;
        const std::size_t i = static_cast<std::size_t>(idx) % eta.n_samples;
        double acc = 0.0;
        for (std::size_t k = 0; k < eta.n_steps; ++k) {
            acc += eta.at(s, i, k) * (bundle.qv_at(s, i, k + 1) - bundle.qv_at(s, i, k));
        }
        out[static_cast<std::size_t>(idx)] = acc;
    });
    return out;
}

namespace {
struct FamilyStat {
    double value = 0.0; // family max of per-scenario means
    double se = 0.0;    // standard error of the attaining scenario
};

FamilyStat family_max_mean(const std::vector<double>& per_sample, std::size_t n_scen,
                           std::size_t n_samples) {
    FamilyStat stat;
    stat.value = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < n_scen; ++s) {
        std::span<const double> block(per_sample.data() + s * n_samples, n_samples);
        const double m = par::mean(block);
        double var = 0.0;
        for (double v : block) var += (v - m) * (v - m);
        var /= std::max<std::size_t>(n_samples - 1, 1);
        const double se = std::sqrt(var / static_cast<double>(n_samples));
        if (m > stat.value) {
            stat.value = m;
            stat.se = se;
        }
    }
    return stat;
}
} // namespace

BdgReport bdg_diagnostic(const std::function<double(double, double)>& eta,
                         const std::vector<ScenarioControl>& family,
                         const VolatilityBand& band, double p, std::size_t n_samples,
                         std::uint64_t seed, const BdgConstants& constants) {
    if (!(p >= 2.0)) throw ConfigError("bdg diagnostic requires p >= 2");
    PathBundle bundle = simulate_paths(family, band, n_samples, seed);
    const std::size_t n_scen = bundle.n_scenarios();
    const std::size_t n_steps = bundle.grid.n_steps();

    std::vector<double> base_fn(n_scen * n_samples, 0.0);
    std::vector<double> sup_fn(n_scen * n_samples, 0.0);
    par::parallel_for(static_cast<std::int64_t>(n_scen * n_samples), [&](std::int64_t idx) {
        const std::size_t s = static_cast<std::size_t>(idx) / n_samples;
        const std::size_t i = static_cast<std::size_t>(idx) % n_samples;
        double quad = 0.0;
        double integral = 0.0;
        double sup = 0.0;
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double e = eta(bundle.grid.time(k), bundle.b_at(s, i, k));
            quad += e * e * bundle.grid.dt(k);
            integral += e * (bundle.b_at(s, i, k + 1) - bundle.b_at(s, i, k));
            sup = std::max(sup, std::fabs(integral));
        }
        base_fn[static_cast<std::size_t>(idx)] = std::pow(quad, p / 2.0);
        sup_fn[static_cast<std::size_t>(idx)] = std::pow(sup, p);
    });

    const FamilyStat base = family_max_mean(base_fn, n_scen, n_samples);
    const FamilyStat mid = family_max_mean(sup_fn, n_scen, n_samples);

    BdgReport report;
    report.p = p;
    report.base = base.value;
    report.base_se = base.se;
    report.mid = mid.value;
    report.mid_se = mid.se;
    report.lhs = std::pow(band.sigma_lo, p) * constants.c_p * base.value;
    report.rhs = std::pow(band.sigma_hi, p) * constants.C_p * base.value;
    report.ratio_low = report.lhs > 0.0 ? report.mid / report.lhs : 0.0;
    report.ratio_high = report.mid > 0.0 ? report.rhs / report.mid : 0.0;
    const double slack_lo = 3.0 * (mid.se + std::pow(band.sigma_lo, p) * constants.c_p * base.se);
    const double slack_hi = 3.0 * (mid.se + std::pow(band.sigma_hi, p) * constants.C_p * base.se);
    report.ordered = (report.lhs <= report.mid + slack_lo) &&
                     (report.mid <= report.rhs + slack_hi);
    return report;
}

ProcessSamples to_process_samples(const StepProcess& eta) {
    ProcessSamples ps;
    ps.n_scenarios = eta.n_scenarios;
    ps.n_samples = eta.n_samples;
    ps.n_steps = eta.n_steps;
    ps.values = eta.v;
    return ps;
}

void write_paths_csv(const PathBundle& bundle, std::ostream& os) {
    os << "# gsde csv paths v1\n";
    os << "scenario,sample,t,B,QV\n";
    char buf[128];
    for (std::size_t s = 0; s < bundle.n_scenarios(); ++s) {
        for (std::size_t i = 0; i < bundle.n_samples; ++i) {
            for (std::size_t k = 0; k < bundle.path_len(); ++k) {
                std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g,%.17g\n", s, i,
                              bundle.grid.time(k), bundle.b_at(s, i, k),
                              bundle.qv_at(s, i, k));
                os << buf;
            }
        }
    }
}

} // namespace gsde
