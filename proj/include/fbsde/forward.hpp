#pragma once

#include "fbsde/problem.hpp"
#include "fbsde/solver_config.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace fbsde {

/// Uniform grid t_0 = s < ... < t_N = T.
struct TimeGrid {
    double s = 0.0;
    double T = 1.0;
    int N = 1;

    TimeGrid() = default;
    TimeGrid(double s, double T, int N);

    double dt() const { return (T - s) / N; }
    /// t_k; t_N is exactly T.
    double t(int k) const { return k == N ? T : s + k * dt(); }
    std::vector<double> points() const;
};

/// Per-step factor F = I + c dt + sum_i C_i dw_i of the multiplicative functional.
struct StepFactor {
    Mat F;
    Mat F_inv;
};

/// Simulated forward system on a shared grid. Storage is path-major; Gamma
/// blocks are column-major d1 x d1.
struct ForwardPaths {
    TimeGrid grid;
    int d = 1;
    int d1 = 1;
    std::int64_t M = 0;
    double start_s = 0.0;
    Vec start_x;
    std::uint64_t seed = 0;

    std::vector<double> increments;  ///< M x N x d, each ~ Normal(0, dt)
    std::vector<double> xi;          ///< M x (N+1) x d
    std::vector<double> gamma;       ///< M x (N+1) x d1 x d1, Gamma(t_k, s)
    std::vector<double> gamma_inv;   ///< M x (N+1) x d1 x d1, Gamma^{-1}(s, t_k)

    int N() const { return grid.N; }

    Eigen::Map<const Vec> dw(std::int64_t m, int k) const {
        return Eigen::Map<const Vec>(increments.data() + (m * grid.N + k) * d, d);
    }
    Eigen::Map<const Vec> xi_at(std::int64_t m, int k) const {
        return Eigen::Map<const Vec>(xi.data() + (m * (grid.N + 1) + k) * d, d);
    }
    Eigen::Map<const Mat> gamma_at(std::int64_t m, int k) const {
        return Eigen::Map<const Mat>(gamma.data() + block_offset(m, k), d1, d1);
    }
    Eigen::Map<const Mat> gamma_inv_at(std::int64_t m, int k) const {
        return Eigen::Map<const Mat>(gamma_inv.data() + block_offset(m, k), d1, d1);
    }

    std::size_t block_offset(std::int64_t m, int k) const {
        return static_cast<std::size_t>((m * (grid.N + 1) + k) * d1 * d1);
    }
};

/// Euler-Maruyama state update xi + a dt + A dw, shared by every forward
/// simulator so that xi paths coincide bitwise for equal seeds.
void euler_state_step(const ProblemSpec& spec, double t, double dt, const CVecRef& xi,
                      const CVecRef& dw, VecRef drift_ws, MatRef diffusion_ws, VecRef out);

/// F_k and its exact inverse at (t_k, xi_k, dw_k). Throws SimulationError when
/// |det F| < 1e-14.
void step_factor(const ProblemSpec& spec, double t, double dt, const CVecRef& xi,
                 const CVecRef& dw, StepFactor& out, MatRef c_ws, MatRef coupling_ws);

/// Brownian increments dw(m, k) = sqrt(dt) * N(0, I_d), keyed by (seed, m, k).
void brownian_increment(std::uint64_t seed, std::int64_t m, int k, double dt, VecRef out);

/// Euler-Maruyama for xi and the multiplicative functional Gamma with per-step
/// exact inverses. Deterministic for a fixed (spec, s, x, seed, M, N),
/// independent of the worker count; path m does not depend on M.
ForwardPaths simulate_forward(const ProblemSpec& spec, double s, const CVecRef& x,
                              const SolverConfig& config);

/// max over paths of |P[k2,k3) P[k1,k2) - P[k1,k3)| (max norm), where P[i,j)
/// is the ordered product F_{j-1} ... F_i of recomputed step factors.
double gamma_compose_check(const ProblemSpec& spec, const ForwardPaths& paths, int k1, int k2,
                           int k3);

/// max over paths and steps of |Gamma_k Gamma_k^{-1} - I| (max norm).
double gamma_inverse_check(const ForwardPaths& paths);

/// Little-endian dump: u64 d, d1, M, N; f64 s, T; u64 seed; then f64 arrays
/// increments, xi, gamma, gamma_inv in storage order.
void write_paths(const ForwardPaths& paths, std::ostream& out);
ForwardPaths read_paths(std::istream& in);

} // namespace fbsde
