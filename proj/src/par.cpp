#include "gsde/par.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gsde::par {

namespace {
std::atomic<bool> g_enabled{true};
constexpr std::int64_t kGrain = 64;
constexpr std::size_t kBlock = 4096;
} // namespace

bool enabled() { return g_enabled.load(std::memory_order_relaxed); }
void set_enabled(bool on) { g_enabled.store(on, std::memory_order_relaxed); }

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace detail {
void run_parallel(std::int64_t n, void* ctx, void (*body)(void*, std::int64_t)) {
#ifdef _OPENMP
    if (enabled() && n > kGrain && omp_get_max_threads() > 1 && !omp_in_parallel()) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) body(ctx, i);
        return;
    }
#endif
    for (std::int64_t i = 0; i < n; ++i) body(ctx, i);
}
} // namespace detail

namespace {
// Combine block partials pairwise in a fixed order.
double pairwise(std::span<const double> v) {
    if (v.size() == 1) return v[0];
    if (v.size() == 2) return v[0] + v[1];
    const std::size_t half = v.size() / 2;
    return pairwise(v.subspan(0, half)) + pairwise(v.subspan(half));
}
} // namespace

double block_pairwise_sum(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const std::size_t n_blocks = (xs.size() + kBlock - 1) / kBlock;
    std::vector<double> partial(n_blocks);
    parallel_for(static_cast<std::int64_t>(n_blocks), [&](std::int64_t b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        const std::size_t hi = std::min(lo + kBlock, xs.size());
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += xs[i];
        partial[static_cast<std::size_t>(b)] = s;
    });
    return pairwise(partial);
}

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return block_pairwise_sum(xs) / static_cast<double>(xs.size());
}

double max_value(std::span<const double> xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    return m;
}

double max_abs(std::span<const double> xs) {
    double m = 0.0;
    for (double x : xs) m = std::max(m, std::fabs(x));
    return m;
}

} // namespace gsde::par
