#pragma once

#include <stdexcept>
#include <string>

namespace gsde {

/// Bad problem setup: invalid bands, grids, tolerances, unparsable config.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A declared property (monotonicity, growth, envelope domination) failed at runtime.
struct InvariantError : std::runtime_error {
    explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values or other numerical breakdown mid-computation.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gsde
