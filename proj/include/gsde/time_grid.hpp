#pragma once

#include <cstddef>
#include <vector>

namespace gsde {

/// Strictly increasing times starting at 0.
class TimeGrid {
public:
    TimeGrid() : times_{0.0} {}
    explicit TimeGrid(std::vector<double> times);

    static TimeGrid uniform(double horizon, std::size_t n_steps);

    std::size_t n_steps() const { return times_.size() - 1; }
    std::size_t n_times() const { return times_.size(); }
    double time(std::size_t k) const { return times_[k]; }
    double dt(std::size_t k) const { return times_[k + 1] - times_[k]; }
    double horizon() const { return times_.back(); }
    const std::vector<double>& times() const { return times_; }

    bool matches(const TimeGrid& other) const { return times_ == other.times_; }

private:
    std::vector<double> times_;
};

} // namespace gsde
