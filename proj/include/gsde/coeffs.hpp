#pragma once

#include <functional>
#include <optional>

#include "gsde/infconv.hpp"

namespace gsde {

/// Drift-style coefficient c(t, x, y) with declared structure. growth_M bounds
/// |c| <= M(1 + |x| + |y|); uses_y = false marks coefficients that ignore y
/// (such specs may run without a driving process).
struct CoefTXY {
    std::function<double(double, double, double)> fn;
    double growth_M = 0.0;
    std::optional<double> lipschitz; // joint in (x, y)
    bool monotone_in_y = true;
    bool uses_y = true;
    bool is_zero = false;

    double operator()(double t, double x, double y) const { return fn(t, x, y); }
};

/// Diffusion sigma(t, x): |sigma| <= M(1+|x|) and Lipschitz in x with the same
/// constant, both required.
struct CoefTX {
    std::function<double(double, double)> fn;
    double growth_M = 0.0;
    double lipschitz = 0.0;

    double operator()(double t, double x) const { return fn(t, x); }
};

/// Driver-style coefficient c(t, x, y, z): |c| <= M(1 + |y| + |z|).
struct Coef4 {
    std::function<double(double, double, double, double)> fn;
    double growth_M = 0.0;
    std::optional<double> lipschitz; // joint in (y, z)
    bool monotone_in_x = true;
    bool is_zero = false;

    double operator()(double t, double x, double y, double z) const { return fn(t, x, y, z); }
};

CoefTXY zero_coef_txy();
Coef4 zero_coef4();
CoefTX constant_sigma(double value);

/// Level-n Lipschitz minorant of b over (x, y), t passed through. Collapses to
/// b itself when the declared Lipschitz constant is <= n.
CoefTXY ladder_level_xy(const CoefTXY& b, double level, const GridPolicy& grid);

/// Level-n minorant of f over (y, z) with (t, x) passed through.
Coef4 ladder_level_yz(const Coef4& f, double level, const GridPolicy& grid);

/// Level schedule n_j = max(ceil(M), 2) * 2^j, j = 0..count-1.
std::vector<double> ladder_levels(double growth_M, std::size_t count);

} // namespace gsde
