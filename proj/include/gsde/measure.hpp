#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gsde {

struct Atom {
    double value = 0.0;
    double prob = 0.0;
};

/// Weighted empirical law over real outcomes.
struct DiscreteLaw {
    std::vector<Atom> atoms;

    /// Probabilities non-negative and summing to 1 within 1e-12.
    void validate() const;
};

/// Equal-weight law over a sample vector.
DiscreteLaw empirical_law(std::span<const double> samples);

/// Finite surrogate for the representing set of measures: a non-empty list of
/// classical laws, typically one per volatility scenario.
struct MeasureFamily {
    std::vector<DiscreteLaw> members;

    void validate() const;
};

using Payoff = std::function<double(double)>;

double classical_expectation(const DiscreteLaw& law, const Payoff& payoff);

/// max over family members of the classical expectation of the payoff.
/// Throws ConfigError on an empty family.
double sublinear_expectation(const Payoff& payoff, const MeasureFamily& family);

/// Per-(scenario, sample) step-process values, row-major:
/// values[(scenario * n_samples + sample) * n_steps + k].
struct ProcessSamples {
    std::size_t n_scenarios = 0;
    std::size_t n_samples = 0;
    std::size_t n_steps = 0;
    std::vector<double> values;

    double at(std::size_t scenario, std::size_t sample, std::size_t k) const {
        return values[(scenario * n_samples + sample) * n_steps + k];
    }
    double& at(std::size_t scenario, std::size_t sample, std::size_t k) {
        return values[(scenario * n_samples + sample) * n_steps + k];
    }
};

enum class NormMode {
    integral,    // (E^[(sum |eta_k|^2 dt_k)^(p/2)])^(1/p)
    running_sup, // (E^[max_k |eta_k|^p])^(1/p)
};

/// Discrete surrogate for the process norms used in diagnostics. Each scenario
/// contributes one empirical law of the path functional; the family max is the
/// sublinear expectation. Requires p >= 1.
double discrete_norm(const ProcessSamples& eta, double p, NormMode mode,
                     std::span<const double> dt);

} // namespace gsde
