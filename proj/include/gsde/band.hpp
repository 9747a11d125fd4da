#pragma once

namespace gsde {

/// Volatility uncertainty interval [sigma_lo, sigma_hi], per sqrt(time unit).
/// Defines the G-function and the scenario control set.
struct VolatilityBand {
    double sigma_lo = 0.0;
    double sigma_hi = 0.0;

    double lo2() const { return sigma_lo * sigma_lo; }
    double hi2() const { return sigma_hi * sigma_hi; }
    bool degenerate() const { return sigma_lo == sigma_hi; }

    /// Requires 0 < sigma_lo <= sigma_hi; throws ConfigError otherwise.
    void validate() const;
};

/// G(a) = (sigma_hi^2 * a^+ - sigma_lo^2 * a^-) / 2.
/// Total on all finite a; positively homogeneous and subadditive in a.
double g_function(double curvature, const VolatilityBand& band);

} // namespace gsde
