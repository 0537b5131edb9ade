#include "fbsde/bsde.hpp"

#include "picard_engine.hpp"

#include <chrono>

namespace fbsde {
namespace {

class VectorSystem final : public detail::BackwardSystem {
public:
    VectorSystem(const ForwardPaths& paths, const ProblemSpec& spec, BasisState basis, int degree)
        : p_(paths),
          spec_(spec),
          basis_(basis),
          monomials_(basis == BasisState::xi_and_gamma ? paths.d + paths.d1 * paths.d1
                                                       : paths.d,
                     degree) {}

    const MonomialBasis& monomials() const { return monomials_; }

    std::int64_t paths() const override { return p_.M; }
    const TimeGrid& grid() const override { return p_.grid; }
    int value_dim() const override { return p_.d1; }
    int noise_dim() const override { return p_.d; }
    int state_dim() const override { return monomials_.dim(); }
    int feature_count() const override { return monomials_.size(); }

    void state(std::int64_t m, int k, double* out) const override {
        const auto xi = p_.xi_at(m, k);
        std::copy_n(xi.data(), p_.d, out);
        if (basis_ == BasisState::xi_and_gamma) {
            std::copy_n(p_.gamma.data() + p_.block_offset(m, k), p_.d1 * p_.d1, out + p_.d);
        }
    }

    void features(std::int64_t, int, const double* normalized, double* out) const override {
        monomials_.eval(normalized, out);
    }

    void terminal(std::int64_t m, double* out) const override {
        thread_local Vec u;
        u.resize(p_.d1);
        spec_.terminal(p_.xi_at(m, p_.N()), u);
        Eigen::Map<Vec>(out, p_.d1).noalias() = p_.gamma_at(m, p_.N()).transpose() * u;
    }

    const double* dw(std::int64_t m, int k) const override {
        return p_.increments.data() + (m * p_.N() + k) * p_.d;
    }

    void driver(std::int64_t m, int k, const double* y, const double* z,
                double* out) const override {
        struct Scratch {
            Vec u, g;
            Mat K;
        };
        thread_local Scratch ws;
        const int d = p_.d, d1 = p_.d1;
        ws.u.resize(d1);
        ws.g.resize(d1);
        ws.K.resize(d1, d);
        Eigen::Map<Vec> result(out, d1);
        generator_f_into(p_.grid.t(k), p_.xi_at(m, k), p_.gamma_at(m, k), p_.gamma_inv_at(m, k),
                         Eigen::Map<const Vec>(y, d1), Eigen::Map<const Mat>(z, d1, d), spec_,
                         ws.u, ws.K, ws.g, result);
    }

    void to_frame(std::int64_t m, int k, double* v, int cols) const override {
        if (basis_ != BasisState::transported) return;
        apply_transposed(p_.gamma_inv_at(m, k), v, cols);
    }

    void from_frame(std::int64_t m, int k, double* v, int cols) const override {
        if (basis_ != BasisState::transported) return;
        apply_transposed(p_.gamma_at(m, k), v, cols);
    }

private:
    const ForwardPaths& p_;
    const ProblemSpec& spec_;
    BasisState basis_;
    MonomialBasis monomials_;

    void apply_transposed(const Eigen::Map<const Mat>& G, double* v, int cols) const {
        thread_local Mat tmp;
        Eigen::Map<Mat> block(v, p_.d1, cols);
        tmp.noalias() = G.transpose() * block;
        block = tmp;
    }
};

} // namespace

void generator_f_into(double t, const CVecRef& xi, const CMatRef& gamma,
                      const CMatRef& gamma_inv, const CVecRef& y, const CMatRef& z,
                      const ProblemSpec& spec, VecRef u_ws, MatRef k_ws, VecRef g_ws,
                      VecRef out) {
    u_ws.noalias() = gamma_inv.transpose() * y;
    k_ws.noalias() = gamma_inv.transpose() * z;
    spec.reaction(t, xi, u_ws, k_ws, g_ws);
    out.noalias() = gamma.transpose() * g_ws;
}

Vec generator_f(double t, const CVecRef& xi, const CMatRef& gamma, const CMatRef& gamma_inv,
                const CVecRef& y, const CMatRef& z, const ProblemSpec& spec) {
    const int d = spec.d, d1 = spec.d1;
    if (xi.size() != d || gamma.rows() != d1 || gamma.cols() != d1 || gamma_inv.rows() != d1 ||
        gamma_inv.cols() != d1 || y.size() != d1 || z.rows() != d1 || z.cols() != d) {
        throw DimensionError("generator_f: operand shapes do not match (d, d1) = (" +
                             std::to_string(d) + ", " + std::to_string(d1) + ")");
    }
    Vec u(d1), g(d1), out(d1);
    Mat K(d1, d);
    generator_f_into(t, xi, gamma, gamma_inv, y, z, spec, u, K, g, out);
    return out;
}

BackwardSolution picard_solve(const ForwardPaths& paths, const ProblemSpec& spec,
                              const SolverConfig& config) {
    config.check();
    spec.check();
    if (paths.d != spec.d || paths.d1 != spec.d1) {
        throw DimensionError("picard_solve: paths were simulated for different (d, d1)");
    }
    if (paths.M < 1) throw DimensionError("picard_solve: no paths");

    const BasisState basis = config.resolved_basis(spec);
    VectorSystem system(paths, spec, basis, config.basis_degree);
    detail::EngineSettings settings;
    settings.picard_max = config.picard_max;
    settings.picard_tol = config.picard_tol;
    settings.beta = config.resolved_beta(spec);
    settings.ridge = config.ridge;
    settings.store_processes = config.store_processes;
    auto result = detail::run_picard(system, settings);

    BackwardSolution sol;
    sol.d = paths.d;
    sol.d1 = paths.d1;
    sol.M = paths.M;
    sol.N = paths.N();
    sol.basis = basis;
    sol.monomials = system.monomials();
    sol.models = std::move(result.models);
    sol.y = std::move(result.y);
    sol.z = std::move(result.z);
    sol.picard_residuals = std::move(result.picard_residuals);
    sol.converged = result.converged;
    sol.iterations = result.iterations;
    sol.y0 = std::move(result.value);
    sol.y0_stderr = std::move(result.std_error);
    return sol;
}

Estimate evaluate_u(const ProblemSpec& spec, double s, const CVecRef& x,
                    const SolverConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    SolverConfig cfg = config;
    cfg.store_processes = false;
    const ForwardPaths paths = simulate_forward(spec, s, x, cfg);
    const BackwardSolution sol = picard_solve(paths, spec, cfg);

    Estimate est;
    est.value = sol.y0;
    est.std_error = sol.y0_stderr;
    est.M = cfg.M;
    est.N = cfg.N;
    est.seed = cfg.seed;
    est.converged = sol.converged;
    est.iterations = sol.iterations;
    est.picard_residuals = sol.picard_residuals;
    est.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return est;
}

std::vector<ConvergenceRow> convergence_study(const ProblemSpec& spec, double s,
                                              const CVecRef& x,
                                              const std::vector<SolverConfig>& configs,
                                              const std::optional<Vec>& oracle) {
    if (oracle && oracle->size() != spec.d1) {
        throw DimensionError("convergence_study: oracle must have d1 entries");
    }
    std::vector<ConvergenceRow> rows;
    rows.reserve(configs.size());
    for (const auto& cfg : configs) {
        const Estimate est = evaluate_u(spec, s, x, cfg);
        ConvergenceRow row;
        row.N = cfg.N;
        row.M = cfg.M;
        row.value = est.value;
        row.std_error = est.std_error;
        if (oracle) {
            row.oracle = *oracle;
            row.error = (est.value - *oracle).cwiseAbs().maxCoeff();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace fbsde
