#include "gsde/registry.hpp"

#include <cctype>
#include <cmath>

#include "gsde/errors.hpp"
#include "gsde/expr.hpp"

namespace gsde {

namespace {

bool uses_variable(const std::string& text, char var) {
    // Single-letter variables never collide with the function names
    // (tanh/exp/abs/min/max contain none of t-as-token, handled by the parser);
    // a conservative scan is enough to set structure flags.
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != var) continue;
        const bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
        const bool right_ok =
            i + 1 == text.size() || !std::isalnum(static_cast<unsigned char>(text[i + 1]));
        if (left_ok && right_ok) return true;
    }
    return false;
}

} // namespace

bool is_builtin_coefficient(const std::string& name) {
    return name == "zero" || name == "one";
}

CoefTXY make_coef_txy(const std::string& source, double growth_M,
                      std::optional<double> lipschitz) {
    if (source == "zero") return zero_coef_txy();
    if (source == "one") {
        CoefTXY c;
        c.fn = [](double, double, double) { return 1.0; };
        c.growth_M = 1.0;
        c.lipschitz = 0.0;
        c.uses_y = false;
        return c;
    }
    const Expr expr = Expr::parse(source);
    CoefTXY c;
    c.fn = [expr](double t, double x, double y) { return expr.eval(t, x, y, 0.0); };
    c.growth_M = growth_M;
    c.lipschitz = lipschitz;
    c.uses_y = uses_variable(source, 'y');
    return c;
}

CoefTX make_coef_tx(const std::string& source, double growth_M, double lipschitz) {
    if (source == "zero") return constant_sigma(0.0);
    if (source == "one") return constant_sigma(1.0);
    const Expr expr = Expr::parse(source);
    CoefTX c;
    c.fn = [expr](double t, double x) { return expr.eval(t, x, 0.0, 0.0); };
    c.growth_M = growth_M;
    c.lipschitz = lipschitz;
    return c;
}

Coef4 make_coef4(const std::string& source, double growth_M, std::optional<double> lipschitz) {
    if (source == "zero") return zero_coef4();
    if (source == "one") {
        Coef4 c;
        c.fn = [](double, double, double, double) { return 1.0; };
        c.growth_M = 1.0;
        c.lipschitz = 0.0;
        return c;
    }
    const Expr expr = Expr::parse(source);
    Coef4 c;
    c.fn = [expr](double t, double x, double y, double z) { return expr.eval(t, x, y, z); };
    c.growth_M = growth_M;
    c.lipschitz = lipschitz;
    return c;
}

std::vector<std::string> preset_names() {
    return {"decoupled_linear", "coupled_tanh", "active_barrier", "coupled_full"};
}

CoupledProblem preset_problem(const std::string& name) {
    CoupledProblem p;
    p.x0 = 0.0;
    p.horizon = 1.0;
    p.h = zero_coef_txy();
    p.g = zero_coef4();
    p.sigma = constant_sigma(1.0);

    if (name == "decoupled_linear") {
        // b(t,x) = -0.2 x, f(t,y) = -0.1 y: no cross coupling, the iteration
        // map is constant after the first pass.
        p.b.fn = [](double, double x, double) { return -0.2 * x; };
        p.b.growth_M = 0.2;
        p.b.lipschitz = 0.2;
        p.b.uses_y = false;
        p.f.fn = [](double, double, double y, double) { return -0.1 * y; };
        p.f.growth_M = 0.1;
        p.f.lipschitz = 0.1;
        p.terminal = [](double x) { return x; };
        p.barrier = [](double, double) { return -1e9; };
        p.barrier_bound = -1e9;
        p.growth_M = 1.0; // sigma = 1 forces M >= 1
        p.envelope_K = 1.0;
        return p;
    }
    if (name == "coupled_tanh") {
        p.b.fn = [](double, double, double y) { return 0.2 * std::tanh(y); };
        p.b.growth_M = 0.2;
        p.b.lipschitz = 0.2;
        p.f.fn = [](double, double x, double y, double) {
            return 0.2 * std::tanh(x) - 0.1 * y;
        };
        p.f.growth_M = 0.3;
        p.f.lipschitz = 0.3;
        p.terminal = [](double x) { return x; };
        p.barrier = [](double, double) { return -1.0; };
        p.barrier_bound = -1.0;
        p.growth_M = 1.0;
        p.envelope_K = 1.0;
        return p;
    }
    if (name == "coupled_full") {
        // All six coefficients active, including the d<B> drifts h and g.
        // K absorbs the quadratic-variation drift: K >= M (1 + sigma_hi^2).
        p.b.fn = [](double, double, double y) { return 0.2 * std::tanh(y); };
        p.b.growth_M = 0.2;
        p.b.lipschitz = 0.2;
        p.h.fn = [](double, double, double y) { return 0.1 * std::tanh(y); };
        p.h.growth_M = 0.1;
        p.h.lipschitz = 0.1;
        p.h.is_zero = false;
        p.f.fn = [](double, double x, double y, double) {
            return 0.2 * std::tanh(x) - 0.1 * y;
        };
        p.f.growth_M = 0.3;
        p.f.lipschitz = 0.3;
        p.g.fn = [](double, double x, double, double) { return 0.1 * std::tanh(x); };
        p.g.growth_M = 0.1;
        p.g.lipschitz = 0.1;
        p.g.is_zero = false;
        p.terminal = [](double x) { return x; };
        p.barrier = [](double, double) { return -1.0; };
        p.barrier_bound = -1.0;
        p.growth_M = 1.0;
        p.envelope_K = 2.0;
        return p;
    }
    if (name == "active_barrier") {
        // Reflected problem whose barrier binds on a wide region.
        p.b.fn = [](double, double, double y) { return 0.1 * std::tanh(y); };
        p.b.growth_M = 0.1;
        p.b.lipschitz = 0.1;
        p.f.fn = [](double, double x, double, double) { return 0.1 * std::tanh(x); };
        p.f.growth_M = 0.1;
        p.f.lipschitz = 0.1;
        p.terminal = [](double x) { return x; };
        p.barrier = [](double, double) { return 0.0; };
        p.barrier_bound = 0.0;
        p.growth_M = 1.0;
        p.envelope_K = 1.0;
        return p;
    }
    throw ConfigError("unknown problem preset '" + name + "'");
}

} // namespace gsde
