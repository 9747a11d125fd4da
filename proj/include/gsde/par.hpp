#pragma once

#include <cstdint>
#include <span>

namespace gsde::par {

/// Runtime switch between the OpenMP kernels and the serial reference path.
/// All kernels must produce bitwise-identical results either way.
bool enabled();
void set_enabled(bool on);

/// Threads the OpenMP runtime would use (1 when built without OpenMP).
int max_threads();

namespace detail {
void run_parallel(std::int64_t n, void* ctx, void (*body)(void*, std::int64_t));
}

/// Parallel loop over [0, n). The body must write only to index-owned state;
/// iteration order is unspecified.
template <class F>
void parallel_for(std::int64_t n, F&& fn) {
    if (n <= 0) return;
    auto thunk = [](void* ctx, std::int64_t i) { (*static_cast<F*>(ctx))(i); };
    detail::run_parallel(n, &fn, thunk);
}

/// Deterministic sum: fixed 4096-element blocks summed left-to-right, block
/// partials combined pairwise. The pairing never depends on the thread count,
/// so serial and parallel runs agree bitwise.
double block_pairwise_sum(std::span<const double> xs);

/// Mean via block_pairwise_sum; 0 for empty input.
double mean(std::span<const double> xs);

double max_value(std::span<const double> xs);
double max_abs(std::span<const double> xs);

} // namespace gsde::par
