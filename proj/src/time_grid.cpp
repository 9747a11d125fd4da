#include "gsde/time_grid.hpp"

#include <cmath>
#include <string>

#include "gsde/errors.hpp"

namespace gsde {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.empty() || times_.front() != 0.0) {
        throw ConfigError("time grid must start at t = 0");
    }
    for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
        if (!(times_[k + 1] > times_[k]) || !std::isfinite(times_[k + 1])) {
            throw ConfigError("time grid must be strictly increasing (offender at index " +
                              std::to_string(k + 1) + ")");
        }
    }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t n_steps) {
    if (n_steps == 0) {
        return TimeGrid(std::vector<double>{0.0});
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw ConfigError("time grid horizon must be positive and finite");
    }
    std::vector<double> times(n_steps + 1);
    const double dt = horizon / static_cast<double>(n_steps);
    for (std::size_t k = 0; k <= n_steps; ++k) times[k] = dt * static_cast<double>(k);
    times[n_steps] = horizon;
    return TimeGrid(std::move(times));
}

} // namespace gsde
