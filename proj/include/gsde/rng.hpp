#pragma once

#include <cstdint>

namespace gsde::rng {

/// Counter-based streams: every variate is a pure function of
/// (seed, scenario, sample, step), so path bundles are reproducible under any
/// parallel schedule and a scenario family can grow without re-drawing
/// existing paths.

std::uint64_t mix64(std::uint64_t x);

/// Uniform draw in (0, 1].
double uniform01(std::uint64_t seed, std::uint64_t scenario, std::uint64_t sample,
                 std::uint64_t step, std::uint64_t salt);

/// Standard normal via Box-Muller on two counter-indexed uniforms.
double normal(std::uint64_t seed, std::uint64_t scenario, std::uint64_t sample,
              std::uint64_t step);

} // namespace gsde::rng
