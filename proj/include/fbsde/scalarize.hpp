#pragma once

#include "fbsde/bsde.hpp"
#include "fbsde/forward.hpp"
#include "fbsde/problem.hpp"

#include <vector>

namespace fbsde {

/// Scalar driver G~(t, kappa, Y, Z), kappa = (xi, eta). Z is the d-vector
/// loading of Y on dw; with W = (w, w) only the sum of the two W-blocks of the
/// enlarged control is identified, and that sum is what Z holds.
using ScalarDriverFn =
    std::function<double(double t, const CVecRef& kappa, double Y, const CVecRef& Z)>;

/// Scalar FBSDE on the enlarged phase space kappa = (xi, eta) in R^{d+d1}.
struct EnlargedSpec {
    ProblemSpec base;
    Vec h;
    ScalarDriverFn G_tilde;

    int dim() const { return base.d + base.d1; }
    /// q(t, kappa) = (a(x), c(x) eta).
    Vec q(double t, const CVecRef& kappa) const;
    /// Q(t, kappa) = [[A(x), 0], [0, C(x) eta]], (d+d1) x 2d; column i of the
    /// lower-right block is C_i eta.
    Mat Q(double t, const CVecRef& kappa) const;
    /// Y(T) = <eta_T, u0(xi_T)>.
    double terminal(const CVecRef& kappa) const;
};

/// Builds the enlarged system with G~ = <h, f>, expressed in enlarged-state
/// variables as <eta, g(t, xi, u, K)>. The state fixes (u, K) only when g
/// ignores them or d1 == 1 (u = Y/eta, K = Z/eta); otherwise this throws
/// ConstructionError and the caller must supply G~ explicitly.
EnlargedSpec build_enlarged(const ProblemSpec& spec, const CVecRef& h);
EnlargedSpec build_enlarged(const ProblemSpec& spec, const CVecRef& h, ScalarDriverFn G_tilde);

struct EnlargedPaths {
    TimeGrid grid;
    int d = 1;
    int d1 = 1;
    std::int64_t M = 0;
    std::uint64_t seed = 0;
    std::vector<double> increments;  ///< M x N x d (same keying as simulate_forward)
    std::vector<double> xi;          ///< M x (N+1) x d
    std::vector<double> eta;         ///< M x (N+1) x d1

    Eigen::Map<const Vec> dw(std::int64_t m, int k) const {
        return Eigen::Map<const Vec>(increments.data() + (m * grid.N + k) * d, d);
    }
    Eigen::Map<const Vec> xi_at(std::int64_t m, int k) const {
        return Eigen::Map<const Vec>(xi.data() + (m * (grid.N + 1) + k) * d, d);
    }
    Eigen::Map<const Vec> eta_at(std::int64_t m, int k) const {
        return Eigen::Map<const Vec>(eta.data() + (m * (grid.N + 1) + k) * d1, d1);
    }
};

/// Euler-Maruyama for kappa; xi coincides bitwise with simulate_forward for
/// equal (seed, M, N).
EnlargedPaths simulate_enlarged(const EnlargedSpec& enlarged, double s, const CVecRef& x,
                                const SolverConfig& config);

struct ScalarEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t M = 0;
    int N = 0;
    std::uint64_t seed = 0;
    bool converged = true;
    int iterations = 0;
    std::vector<double> picard_residuals;
};

/// Y(s) of the enlarged scalar BSDE, by the same Picard-regression scheme as
/// the vector solver with regression features eta_i * monomials(xi).
ScalarEstimate solve_scalar(const EnlargedSpec& enlarged, double s, const CVecRef& x,
                            const SolverConfig& config);

// ---------------------------------------------------------------------------
// comparison

/// Outcome of sampling the ordering hypotheses for a pair of problems.
struct C31Summary {
    int terminal_samples = 0;
    int terminal_passed = 0;
    int generator_samples = 0;
    int generator_passed = 0;
    double max_terminal_violation = 0.0;
    double max_generator_violation = 0.0;

    double pass_rate() const;
    bool satisfied() const { return pass_rate() == 1.0; }
};

/// Samples (i) zeta^1 <= zeta^2 at simulated terminal states and (ii)
/// f^1_m <= f^2_m on configurations with y^1_l <= y^2_l (l != m), y^1_m = y^2_m
/// and equal m-th control rows. Both problems share the Brownian paths.
C31Summary check_C31(const ProblemSpec& spec1, const ProblemSpec& spec2, int sample_count,
                     std::uint64_t rng_seed);

struct ComparisonRecord {
    std::uint64_t seed = 0;
    Vec y1, y2;
    Vec se1, se2;
};

struct ComparisonReport {
    std::vector<ComparisonRecord> records;
    std::vector<int> violations;       ///< per component
    double max_violation = 0.0;        ///< max of y1 - y2 - band over all records
    std::vector<bool> strictly_above;  ///< per component: y2 - y1 > band on every seed
    C31Summary hypotheses;
    bool exploratory = false;          ///< hypotheses not satisfied

    int total_violations() const;
};

/// Solves both problems on common random numbers for seeds config.seed + i,
/// i < n_seeds, and counts y1_m(s) > y2_m(s) + 3 (se1_m + se2_m).
ComparisonReport comparison_harness(const ProblemSpec& spec1, const ProblemSpec& spec2,
                                    double s, const CVecRef& x, const SolverConfig& config,
                                    int n_seeds);

/// Same harness for two scalar enlarged problems (components of size 1).
ComparisonReport scalar_comparison_harness(const EnlargedSpec& first, const EnlargedSpec& second,
                                           double s, const CVecRef& x,
                                           const SolverConfig& config, int n_seeds);

} // namespace fbsde
