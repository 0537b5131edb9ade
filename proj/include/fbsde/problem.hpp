#pragma once

#include "fbsde/types.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fbsde {

// Coefficient callbacks write into caller-owned storage so the hot simulation
// loops never allocate. All of them must be pure.

/// a(t, x) -> d-vector.
using DriftFn = std::function<void(double t, const CVecRef& x, VecRef out)>;
/// A(t, x) -> d x d, c(t, x) -> d1 x d1.
using MatrixFn = std::function<void(double t, const CVecRef& x, MatRef out)>;
/// C(t, x) -> d1 x (d*d1); block k (columns [k*d1, (k+1)*d1)) is C_k, the
/// loading of the multiplicative functional on Brownian component k.
using CouplingFn = std::function<void(double t, const CVecRef& x, MatRef out)>;
/// g(t, x, u, K) -> d1-vector with K a d1 x d matrix.
using ReactionFn = std::function<void(double t, const CVecRef& x, const CVecRef& u,
                                      const CMatRef& K, VecRef out)>;
/// u0(x) -> d1-vector.
using TerminalFn = std::function<void(const CVecRef& x, VecRef out)>;

inline constexpr double kUndeclared = std::numeric_limits<double>::quiet_NaN();

/// Declared growth and Lipschitz constants. Diagnostic metadata only; NaN means
/// the constant was not declared.
struct LipschitzBudget {
    double K1 = kUndeclared;  ///< |a|^2 + |A|^2 <= K1 (1 + |x|^2)
    double K2 = kUndeclared;  ///< |c h|^2 + |C h|^2 <= K2 |h|^2
    double L1 = kUndeclared;  ///< |da|^2 + |dA|^2 <= L1 |dx|^2
    double L2 = kUndeclared;  ///< |dc h|^2 + |dC h|^2 <= L2 |dx|^2 |h|^2
    double L3 = kUndeclared;  ///< |g(x1) - g(x2)| <= L3 |dx|
    double L = kUndeclared;   ///< |g(u1,K1) - g(u2,K2)| <= L (|du| + |dK|)
    double mu = kUndeclared;  ///< <du, dg> <= mu |du|^2
    double C0 = kUndeclared;  ///< |u0(x1) - u0(x2)| <= C0 |dx|
};

/// Region over which the budget is declared and sampled by validate().
struct BudgetBox {
    double x_radius = 10.0;
    double u_radius = 10.0;
    double k_radius = 10.0;
};

enum class ReactionKind {
    zero,        ///< g == 0
    state_only,  ///< g = g(t, x), independent of (u, K)
    general,
};

/// One PDE system / FBSDE instance. Immutable after construction.
///
/// The solved system, component l = 1..d1, is
///
///   du_l/ds + 1/2 Tr(A^T D^2u_l A) + <a, grad u_l>
///       + sum_{i,m} B^i_{lm} d_i u_m + (c^T u)_l + g_l(s, x, u, K) = 0,
///   u(T, x) = u0(x),
///
/// with K = gradient_load(C, A, u, grad u) and B = first_order_coupling().
/// Here c and C are the coefficients of the linear SDE driving the
/// multiplicative functional, d eta = c eta dt + sum_k C_k eta dw_k; the PDE
/// sees their adjoints.
struct ProblemSpec {
    std::string name;
    int d = 1;
    int d1 = 1;
    double T = 1.0;

    DriftFn drift;
    MatrixFn diffusion;
    MatrixFn zero_order;
    CouplingFn gradient_coupling;
    ReactionFn reaction;
    TerminalFn terminal;

    LipschitzBudget budget;
    BudgetBox box;

    /// c == 0 and C == 0, so the functional is the identity.
    bool coupling_free = false;
    ReactionKind reaction_kind = ReactionKind::general;

    /// Throws DimensionError / ConstructionError when the invariants fail.
    void check() const;

    // Allocating convenience evaluators; the solver uses the callbacks directly.
    Vec a(double t, const CVecRef& x) const;
    Mat A(double t, const CVecRef& x) const;
    Mat c(double t, const CVecRef& x) const;
    Mat C(double t, const CVecRef& x) const;
    Vec g(double t, const CVecRef& x, const CVecRef& u, const CMatRef& K) const;
    Vec u0(const CVecRef& x) const;
};

/// Splits a d1 x (d*d1) coupling block matrix into its d matrices.
std::vector<Mat> split_coupling(const CMatRef& blocks, int d);
Mat join_coupling(const std::vector<Mat>& C);

/// B^i_{lm} = sum_q C^q_{lm} A_{qi}: C holds d matrices (d1 x d1), A is d x d.
/// Returns d matrices, B[i] = B^i.
std::vector<Mat> derive_B(const std::vector<Mat>& C, const Mat& A);

/// First-order coupling of the solved PDE at (t, x): derive_B applied to the
/// adjoint pair (C_k^T, A^T), i.e. B^i_{lm} = sum_k C_k(m, l) A(i, k).
std::vector<Mat> first_order_coupling(const ProblemSpec& spec, double t, const CVecRef& x);

/// K(u, grad u): row l, column k holds (A^T grad u_l)_k + sum_m C_k(m, l) u_m.
/// `jac` is the d1 x d Jacobian (row l = grad u_l), `coupling` the block form.
Mat gradient_load(const CMatRef& coupling, const CMatRef& A, const CVecRef& u,
                  const CMatRef& jac);

/// Pointwise derivatives of a candidate solution.
struct SolutionJet {
    Vec u;                  ///< d1
    Vec du_ds;              ///< d1
    Mat jac;                ///< d1 x d
    std::vector<Mat> hess;  ///< d1 matrices, each d x d
};

/// Left-hand side of the PDE system at (s, x). Zero for an exact solution.
Vec pde_residual(const ProblemSpec& spec, double s, const CVecRef& x, const SolutionJet& jet);

// ---------------------------------------------------------------------------
// validation

struct ValidationEntry {
    std::string name;
    double observed = 0.0;
    double declared = kUndeclared;
    bool flagged = false;
};

struct ValidationReport {
    std::vector<ValidationEntry> entries;
    int sample_count = 0;
    std::uint64_t seed = 0;

    bool any_flagged() const;
    const ValidationEntry& at(const std::string& name) const;
};

/// Empirical growth / Lipschitz ratios over `sample_count` random point pairs
/// drawn from spec.box. Never rejects; exceedances of declared constants are
/// flagged.
ValidationReport validate(const ProblemSpec& spec, int sample_count, std::uint64_t rng_seed);

// ---------------------------------------------------------------------------
// catalog

/// Closed-form solution u(s, x) of a catalog entry.
using ReferenceSolution = std::function<Vec(double s, const CVecRef& x)>;

std::vector<std::string> catalog_names();

/// Built-in problems:
///   heat-1d                   d=d1=1, A=1, u0=x^2, T=1. u = x^2 + (T - s).
///   rotation-coupling         d=1, d1=2, A=1, c=[[0,1],[-1,0]], u0=(cos x, sin x),
///                             T=pi/2. u = exp(c^T (T-s)) e^{-(T-s)/2} u0(x).
///   first-order-coupling      d=1, d1=2, A=1, C_1=[[0.3,0.5],[-0.2,0.1]],
///                             u0=(cos x, sin x), T=1. Fourier closed form.
///   manufactured-quasilinear  see manufactured_quasilinear().
ProblemSpec catalog(const std::string& name);

/// Closed-form solution for a catalog entry, if one exists.
std::optional<ReferenceSolution> reference_solution(const std::string& name);

// ---------------------------------------------------------------------------
// manufactured solutions

/// Exact solution with analytic derivatives. `hess` writes a d1 x (d*d) matrix
/// whose row l is the column-major Hessian of u_l.
struct ManufacturedSolution {
    std::function<void(double s, const CVecRef& x, VecRef out)> value;
    std::function<void(double s, const CVecRef& x, VecRef out)> ds;
    std::function<void(double s, const CVecRef& x, MatRef out)> jac;
    std::function<void(double s, const CVecRef& x, MatRef out)> hess;
};

/// psi(u, K) -> d1-vector, the injected nonlinearity.
using PsiFn = std::function<void(const CVecRef& u, const CMatRef& K, VecRef out)>;

struct ManufacturedProblem {
    ProblemSpec base;
    ManufacturedSolution u_star;
    double lambda = 0.0;

    Vec exact(double s, const CVecRef& x) const;
    SolutionJet jet(double s, const CVecRef& x) const;
};

/// Builds g(s,x,u,K) = gt(s,x) + lambda [psi(u,K) - psi(u*, K(u*, grad u*))]
/// with gt chosen so that u_star solves the system exactly, and u0 = u_star(T, .).
/// Uses base's a, A, c, C, d, d1, T; base's g and u0 are ignored.
ManufacturedProblem manufacture(const ProblemSpec& base, ManufacturedSolution u_star,
                                double lambda, PsiFn psi);

/// The "manufactured-quasilinear" catalog entry with its exact solution.
ManufacturedProblem manufactured_quasilinear();

} // namespace fbsde
