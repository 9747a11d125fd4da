#include "gsde/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsde/errors.hpp"
#include "gsde/par.hpp"

namespace gsde {

void DiscreteLaw::validate() const {
    if (atoms.empty()) throw ConfigError("discrete law has no atoms");
    double total = 0.0;
    for (const Atom& a : atoms) {
        if (a.prob < 0.0 || !std::isfinite(a.prob)) {
            throw ConfigError("discrete law has a negative or non-finite probability");
        }
        total += a.prob;
    }
    if (std::fabs(total - 1.0) > 1e-12) {
        throw ConfigError("discrete law probabilities sum to " + std::to_string(total) +
                          ", expected 1 within 1e-12");
    }
}

DiscreteLaw empirical_law(std::span<const double> samples) {
    if (samples.empty()) throw ConfigError("empirical law over empty sample set");
    DiscreteLaw law;
    law.atoms.reserve(samples.size());
    const double w = 1.0 / static_cast<double>(samples.size());
    for (double v : samples) law.atoms.push_back({v, w});
    return law;
}

void MeasureFamily::validate() const {
    if (members.empty()) throw ConfigError("measure family is empty");
    for (const DiscreteLaw& m : members) m.validate();
}

double classical_expectation(const DiscreteLaw& law, const Payoff& payoff) {
    std::vector<double> terms(law.atoms.size());
    for (std::size_t i = 0; i < law.atoms.size(); ++i) {
        terms[i] = payoff(law.atoms[i].value) * law.atoms[i].prob;
    }
    return par::block_pairwise_sum(terms);
}

double sublinear_expectation(const Payoff& payoff, const MeasureFamily& family) {
    family.validate();
    std::vector<double> per_member(family.members.size());
    for (std::size_t m = 0; m < family.members.size(); ++m) {
        per_member[m] = classical_expectation(family.members[m], payoff);
    }
    return par::max_value(per_member);
}

double discrete_norm(const ProcessSamples& eta, double p, NormMode mode,
                     std::span<const double> dt) {
    if (!(p >= 1.0)) throw ConfigError("discrete_norm requires exponent p >= 1");
    if (eta.n_scenarios == 0 || eta.n_samples == 0) {
        throw ConfigError("discrete_norm over empty process samples");
    }
    if (mode == NormMode::integral && dt.size() < eta.n_steps) {
        throw ConfigError("discrete_norm: dt array shorter than the step count");
    }

    MeasureFamily family;
    family.members.resize(eta.n_scenarios);
    for (std::size_t s = 0; s < eta.n_scenarios; ++s) {
        std::vector<double> functional(eta.n_samples);
        par::parallel_for(static_cast<std::int64_t>(eta.n_samples), [&](std::int64_t i) {
            const auto ii = static_cast<std::size_t>(i);
            double acc = 0.0;
            if (mode == NormMode::integral) {
                for (std::size_t k = 0; k < eta.n_steps; ++k) {
                    const double v = eta.at(s, ii, k);
                    acc += v * v * dt[k];
                }
                acc = std::pow(acc, p / 2.0);
            } else {
                for (std::size_t k = 0; k < eta.n_steps; ++k) {
                    acc = std::max(acc, std::fabs(eta.at(s, ii, k)));
                }
                acc = std::pow(acc, p);
            }
            functional[ii] = acc;
        });
        family.members[s] = empirical_law(functional);
    }

    const double e = sublinear_expectation([](double v) { return v; }, family);
    return std::pow(e, 1.0 / p);
}

} // namespace gsde
