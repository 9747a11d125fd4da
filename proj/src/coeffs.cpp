#include "gsde/coeffs.hpp"

#include <array>
#include <cmath>

namespace gsde {

CoefTXY zero_coef_txy() {
    CoefTXY c;
    c.fn = [](double, double, double) { return 0.0; };
    c.growth_M = 0.0;
    c.lipschitz = 0.0;
    c.uses_y = false;
    c.is_zero = true;
    return c;
}

Coef4 zero_coef4() {
    Coef4 c;
    c.fn = [](double, double, double, double) { return 0.0; };
    c.growth_M = 0.0;
    c.lipschitz = 0.0;
    c.is_zero = true;
    return c;
}

CoefTX constant_sigma(double value) {
    CoefTX c;
    c.fn = [value](double, double) { return value; };
    c.growth_M = std::fabs(value);
    c.lipschitz = 0.0;
    return c;
}

CoefTXY ladder_level_xy(const CoefTXY& b, double level, const GridPolicy& grid) {
    CoefTXY out = b;
    if (b.lipschitz && *b.lipschitz <= level) return out; // f_n = f for n >= Lip(f)
    out.lipschitz = level;
    out.fn = [b, level, grid](double t, double x, double y) {
        GrowthBoundedFunction base;
        base.eval = [&b, t](std::span<const double> p) { return b.fn(t, p[0], p[1]); };
        base.arity = 2;
        base.growth_M = b.growth_M;
        InfConvApprox approx{std::move(base), level, grid, std::nullopt};
        const std::array<double, 2> query{x, y};
        return inf_convolve(approx, query);
    };
    return out;
}

Coef4 ladder_level_yz(const Coef4& f, double level, const GridPolicy& grid) {
    Coef4 out = f;
    if (f.lipschitz && *f.lipschitz <= level) return out;
    out.lipschitz = level;
    out.fn = [f, level, grid](double t, double x, double y, double z) {
        GrowthBoundedFunction base;
        base.eval = [&f, t, x](std::span<const double> p) { return f.fn(t, x, p[0], p[1]); };
        base.arity = 2;
        base.growth_M = f.growth_M;
        InfConvApprox approx{std::move(base), level, grid, std::nullopt};
        const std::array<double, 2> query{y, z};
        return inf_convolve(approx, query);
    };
    return out;
}

std::vector<double> ladder_levels(double growth_M, std::size_t count) {
    const double first = std::max(std::ceil(growth_M), 2.0);
    std::vector<double> levels(count);
    double n = first;
    for (std::size_t j = 0; j < count; ++j) {
        levels[j] = n;
        n *= 2.0;
    }
    return levels;
}

} // namespace gsde
