#pragma once

#include "fbsde/forward.hpp"
#include "fbsde/problem.hpp"
#include "fbsde/regression.hpp"
#include "fbsde/solver_config.hpp"

#include <optional>
#include <vector>

namespace fbsde {

/// Transformed BSDE driver
///   f = Gamma^T g(t, xi, Gamma^{-T} y, Gamma^{-T} z),
/// Gamma^{-T} taken as the transpose of gamma_inv. The control z (d1 x d)
/// already carries the C^T u + A^T grad u loading, so Gamma^{-T} z is the K
/// argument of g.
Vec generator_f(double t, const CVecRef& xi, const CMatRef& gamma, const CMatRef& gamma_inv,
                const CVecRef& y, const CMatRef& z, const ProblemSpec& spec);

/// Allocation-free form used by the solvers. `u_ws` (d1) and `k_ws` (d1 x d)
/// are scratch; `g_ws` (d1) receives g before the Gamma^T transform.
void generator_f_into(double t, const CVecRef& xi, const CMatRef& gamma,
                      const CMatRef& gamma_inv, const CVecRef& y, const CMatRef& z,
                      const ProblemSpec& spec, VecRef u_ws, MatRef k_ws, VecRef g_ws,
                      VecRef out);

/// Per-time-step regression model: state normalization plus the fitted map
/// from monomials of the normalized state to (y, vec z) in the regression frame.
struct RegressionModel {
    Vec state_shift;
    Vec state_scale;
    LinearFit fit;
};

struct BackwardSolution {
    int d = 1;
    int d1 = 1;
    std::int64_t M = 0;
    int N = 0;
    BasisState basis = BasisState::xi_only;
    MonomialBasis monomials;
    std::vector<RegressionModel> models;  ///< one per step k = 0..N-1

    std::vector<double> y;  ///< M x (N+1) x d1 (empty unless store_processes)
    std::vector<double> z;  ///< M x N x (d1 x d), column-major blocks

    std::vector<double> picard_residuals;  ///< beta-norm of successive increments
    bool converged = false;
    int iterations = 0;

    Vec y0;         ///< estimate of y(s)
    Vec y0_stderr;  ///< standard error of the layer-0 pathwise targets

    bool has_processes() const { return !y.empty(); }
    Eigen::Map<const Vec> y_at(std::int64_t m, int k) const {
        return Eigen::Map<const Vec>(y.data() + (m * (N + 1) + k) * d1, d1);
    }
    Eigen::Map<const Mat> z_at(std::int64_t m, int k) const {
        return Eigen::Map<const Mat>(z.data() + (m * N + k) * d1 * d, d1, d);
    }
};

/// Picard iteration of the map y = E[zeta + int f | F_t] with per-step
/// least-squares regression, common random numbers across iterations.
/// Non-convergence is reported through `converged`, never thrown.
BackwardSolution picard_solve(const ForwardPaths& paths, const ProblemSpec& spec,
                              const SolverConfig& config);

/// Monte Carlo value with standard error and run metadata.
struct Estimate {
    Vec value;
    Vec std_error;
    std::int64_t M = 0;
    int N = 0;
    std::uint64_t seed = 0;
    double wall_time = 0.0;  ///< seconds
    bool converged = true;
    int iterations = 0;
    std::vector<double> picard_residuals;
};

/// u(s, x) = y^{s,x}(s): simulate_forward followed by picard_solve.
Estimate evaluate_u(const ProblemSpec& spec, double s, const CVecRef& x,
                    const SolverConfig& config);

struct ConvergenceRow {
    int N = 0;
    std::int64_t M = 0;
    Vec value;
    Vec std_error;
    std::optional<Vec> oracle;
    std::optional<double> error;  ///< max-norm |value - oracle|
};

/// evaluate_u for each configuration in turn.
std::vector<ConvergenceRow> convergence_study(const ProblemSpec& spec, double s,
                                              const CVecRef& x,
                                              const std::vector<SolverConfig>& configs,
                                              const std::optional<Vec>& oracle);

} // namespace fbsde
