#include "gsde/band.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsde/errors.hpp"

namespace gsde {

void VolatilityBand::validate() const {
    if (!(sigma_lo > 0.0) || !(sigma_hi >= sigma_lo) || !std::isfinite(sigma_hi)) {
        throw ConfigError("volatility band requires 0 < sigma_lo <= sigma_hi, got [" +
                          std::to_string(sigma_lo) + ", " + std::to_string(sigma_hi) + "]");
    }
}

double g_function(double curvature, const VolatilityBand& band) {
    const double apos = std::max(curvature, 0.0);
    const double aneg = std::max(-curvature, 0.0);
    return 0.5 * (band.hi2() * apos - band.lo2() * aneg);
}

} // namespace gsde
