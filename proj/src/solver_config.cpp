#include "fbsde/solver_config.hpp"

#include <cmath>

namespace fbsde {

void SolverConfig::check() const {
    if (N < 1) throw ConfigError("solver.N: must be >= 1");
    if (M < 1) throw ConfigError("solver.M: must be >= 1");
    if (picard_max < 1) throw ConfigError("solver.picard_max: must be >= 1");
    if (!(picard_tol >= 0.0)) throw ConfigError("solver.picard_tol: must be >= 0");
    if (beta && !(*beta >= 0.0 && std::isfinite(*beta))) {
        throw ConfigError("solver.beta: must be a finite value >= 0");
    }
    if (basis_degree < 0) throw ConfigError("solver.basis_degree: must be >= 0");
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ConfigError("solver.ridge: must be >= 0");
}

double SolverConfig::resolved_beta(const ProblemSpec& spec) const {
    if (beta) return *beta;
    const double L = spec.budget.L;
    return std::isfinite(L) ? 1.0 + 4.0 * L * L : 1.0;
}

BasisState SolverConfig::resolved_basis(const ProblemSpec& spec) const {
    if (basis_state) return *basis_state;
    return spec.coupling_free ? BasisState::xi_only : BasisState::transported;
}

} // namespace fbsde
