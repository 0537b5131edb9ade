#pragma once

#include "fbsde/problem.hpp"

#include <cstdint>
#include <optional>

namespace fbsde {

/// Regression state for the conditional expectations of the backward solver.
enum class BasisState {
    xi_only,       ///< monomials of xi_k
    xi_and_gamma,  ///< monomials of the joint state (xi_k, vec Gamma_k)
    transported,   ///< regress Gamma_k^{-T} * target on monomials of xi_k, map back
};

struct SolverConfig {
    int N = 100;                 ///< time steps
    std::int64_t M = 10000;      ///< paths
    std::uint64_t seed = 1;
    int picard_max = 30;
    double picard_tol = 1e-4;    ///< on the beta-weighted increment norm
    std::optional<double> beta;  ///< default 1 + 4 L^2 from the declared budget
    int basis_degree = 2;
    std::optional<BasisState> basis_state;  ///< default depends on the problem
    double ridge = 1e-10;
    bool store_processes = true;  ///< materialize per-path y and z

    void check() const;
    double resolved_beta(const ProblemSpec& spec) const;
    BasisState resolved_basis(const ProblemSpec& spec) const;

    bool operator==(const SolverConfig&) const = default;
};

} // namespace fbsde
