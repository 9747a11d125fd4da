#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gsde/solver.hpp"

namespace gsde {

/// Named coefficient builders: a config value is either a built-in name or an
/// expression string in t/x/y/z. Metadata (growth constant, Lipschitz
/// constant, structure flags) comes from the accompanying config keys.
bool is_builtin_coefficient(const std::string& name);

CoefTXY make_coef_txy(const std::string& source, double growth_M,
                      std::optional<double> lipschitz);
CoefTX make_coef_tx(const std::string& source, double growth_M, double lipschitz);
Coef4 make_coef4(const std::string& source, double growth_M,
                 std::optional<double> lipschitz);

/// Shipped coupled test problems, referenced by name from configs.
std::vector<std::string> preset_names();
CoupledProblem preset_problem(const std::string& name);

} // namespace gsde
