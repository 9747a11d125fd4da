#include "gsde/rng.hpp"

#include <cmath>
#include <numbers>

namespace gsde::rng {

std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t scenario, std::uint64_t sample,
                           std::uint64_t step, std::uint64_t salt) {
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc908ULL);
    h = mix64(h ^ scenario);
    h = mix64(h ^ sample);
    h = mix64(h ^ step);
    h = mix64(h ^ salt);
    return h;
}
} // namespace

double uniform01(std::uint64_t seed, std::uint64_t scenario, std::uint64_t sample,
                 std::uint64_t step, std::uint64_t salt) {
    const std::uint64_t h = counter_hash(seed, scenario, sample, step, salt);
    // 53 high bits, shifted into (0, 1]
    return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

double normal(std::uint64_t seed, std::uint64_t scenario, std::uint64_t sample,
              std::uint64_t step) {
    const double u1 = uniform01(seed, scenario, sample, step, 0);
    const double u2 = uniform01(seed, scenario, sample, step, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace gsde::rng
