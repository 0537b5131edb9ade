#include "fbsde/scalarize.hpp"

#include "fbsde/parallel.hpp"
#include "picard_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fbsde {
namespace {

void check_direction(const ProblemSpec& spec, const CVecRef& h) {
    if (h.size() != spec.d1) {
        throw DimensionError("build_enlarged: h has " + std::to_string(h.size()) +
                             " entries, expected d1=" + std::to_string(spec.d1));
    }
    if (!h.allFinite()) throw ConstructionError("build_enlarged: h must be finite");
}

class ScalarSystem final : public detail::BackwardSystem {
public:
    ScalarSystem(const EnlargedSpec& enl, const EnlargedPaths& paths, int degree)
        : enl_(enl), p_(paths), mono_(paths.d, degree), frozen_(enl.base.coupling_free) {}

    std::int64_t paths() const override { return p_.M; }
    const TimeGrid& grid() const override { return p_.grid; }
    int value_dim() const override { return 1; }
    int noise_dim() const override { return p_.d; }
    int state_dim() const override { return p_.d; }
    // With a frozen direction eta == h, so Y is a function of xi alone.
    int feature_count() const override { return frozen_ ? mono_.size() : p_.d1 * mono_.size(); }

    void state(std::int64_t m, int k, double* out) const override {
        std::copy_n(p_.xi_at(m, k).data(), p_.d, out);
    }

    void features(std::int64_t m, int k, const double* normalized, double* out) const override {
        mono_.eval(normalized, out);
        if (frozen_) return;
        const int P = mono_.size();
        const auto eta = p_.eta_at(m, k);
        for (int i = p_.d1 - 1; i >= 0; --i) {
            for (int j = 0; j < P; ++j) out[i * P + j] = eta[i] * out[j];
        }
    }

    void terminal(std::int64_t m, double* out) const override {
        thread_local Vec kappa;
        kappa.resize(p_.d + p_.d1);
        kappa << p_.xi_at(m, p_.grid.N), p_.eta_at(m, p_.grid.N);
        out[0] = enl_.terminal(kappa);
    }

    const double* dw(std::int64_t m, int k) const override {
        return p_.increments.data() + (m * p_.grid.N + k) * p_.d;
    }

    void driver(std::int64_t m, int k, const double* y, const double* z,
                double* out) const override {
        thread_local Vec kappa;
        kappa.resize(p_.d + p_.d1);
        kappa << p_.xi_at(m, k), p_.eta_at(m, k);
        out[0] = enl_.G_tilde(p_.grid.t(k), kappa, y[0], Eigen::Map<const Vec>(z, p_.d));
    }

private:
    const EnlargedSpec& enl_;
    const EnlargedPaths& p_;
    MonomialBasis mono_;
    bool frozen_;
};

SolverConfig hypothesis_config(std::uint64_t seed, std::int64_t paths) {
    SolverConfig cfg;
    cfg.N = 16;
    cfg.M = paths;
    cfg.seed = seed;
    return cfg;
}

bool violates(double lhs, double rhs, double& worst) {
    const double excess = lhs - rhs;
    worst = std::max(worst, excess);
    return excess > 1e-10 * (1.0 + std::abs(lhs) + std::abs(rhs));
}

constexpr int kBatch = 64;

C31Summary check_scalar_hypotheses(const EnlargedSpec& first, const EnlargedSpec& second,
                                   int sample_count, std::uint64_t seed) {
    const int d = first.base.d;
    const int d1 = first.base.d1;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    C31Summary summary;
    const double rx = first.base.box.x_radius;
    const double ru = first.base.box.u_radius;
    const double rk = first.base.box.k_radius;
    for (int done = 0; done < sample_count; done += kBatch) {
        const int batch = std::min(kBatch, sample_count - done);
        Vec x(d);
        for (auto& v : x) v = 0.5 * rx * unit(rng);
        const auto cfg = hypothesis_config(seed + static_cast<std::uint64_t>(done), batch);
        const auto p1 = simulate_enlarged(first, 0.0, x, cfg);
        const auto p2 = simulate_enlarged(second, 0.0, x, cfg);
        Vec k1(d + d1), k2(d + d1), Z(d);
        for (int m = 0; m < batch; ++m) {
            k1 << p1.xi_at(m, cfg.N), p1.eta_at(m, cfg.N);
            k2 << p2.xi_at(m, cfg.N), p2.eta_at(m, cfg.N);
            ++summary.terminal_samples;
            if (!violates(first.terminal(k1), second.terminal(k2), summary.max_terminal_violation)) {
                ++summary.terminal_passed;
            }
            const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.N));
            k1 << p1.xi_at(m, k), p1.eta_at(m, k);
            k2 << p2.xi_at(m, k), p2.eta_at(m, k);
            const double Y = ru * unit(rng);
            for (auto& v : Z) v = rk * unit(rng);
            const double t = p1.grid.t(k);
            ++summary.generator_samples;
            if (!violates(first.G_tilde(t, k1, Y, Z), second.G_tilde(t, k2, Y, Z),
                          summary.max_generator_violation)) {
                ++summary.generator_passed;
            }
        }
    }
    return summary;
}

void tally(ComparisonReport& report, std::uint64_t seed, Vec y1, Vec y2, Vec se1, Vec se2) {
    const auto n = y1.size();
    if (report.records.empty()) {
        report.violations.assign(n, 0);
        report.strictly_above.assign(n, true);
        report.max_violation = -std::numeric_limits<double>::infinity();
    }
    for (Eigen::Index m = 0; m < n; ++m) {
        const double band = 3.0 * (se1[m] + se2[m]);
        const double excess = y1[m] - y2[m] - band;
        report.max_violation = std::max(report.max_violation, excess);
        if (excess > 0.0) ++report.violations[m];
        if (!(y2[m] - y1[m] > band)) report.strictly_above[m] = false;
    }
    report.records.push_back({seed, std::move(y1), std::move(y2), std::move(se1), std::move(se2)});
}

} // namespace

// ---------------------------------------------------------------------------
// enlarged system

Vec EnlargedSpec::q(double t, const CVecRef& kappa) const {
    const int d = base.d, d1 = base.d1;
    if (kappa.size() != dim()) throw DimensionError("q: kappa must have d + d1 entries");
    Vec out(dim());
    out.head(d) = base.a(t, kappa.head(d));
    out.tail(d1) = base.c(t, kappa.head(d)) * kappa.tail(d1);
    return out;
}

Mat EnlargedSpec::Q(double t, const CVecRef& kappa) const {
    const int d = base.d, d1 = base.d1;
    if (kappa.size() != dim()) throw DimensionError("Q: kappa must have d + d1 entries");
    Mat out = Mat::Zero(dim(), 2 * d);
    out.topLeftCorner(d, d) = base.A(t, kappa.head(d));
    const Mat C = base.C(t, kappa.head(d));
    for (int i = 0; i < d; ++i) {
        out.block(d, d + i, d1, 1) = C.middleCols(i * d1, d1) * kappa.tail(d1);
    }
    return out;
}

double EnlargedSpec::terminal(const CVecRef& kappa) const {
    if (kappa.size() != dim()) throw DimensionError("terminal: kappa must have d + d1 entries");
    return kappa.tail(base.d1).dot(base.u0(kappa.head(base.d)));
}

EnlargedSpec build_enlarged(const ProblemSpec& spec, const CVecRef& h) {
    spec.check();
    check_direction(spec, h);
    const int d = spec.d;
    const int d1 = spec.d1;
    ScalarDriverFn G;
    switch (spec.reaction_kind) {
    case ReactionKind::zero:
        G = [](double, const CVecRef&, double, const CVecRef&) { return 0.0; };
        break;
    case ReactionKind::state_only:
        G = [spec, d, d1](double t, const CVecRef& kappa, double, const CVecRef&) {
            thread_local Vec g;
            g.resize(d1);
            const Vec u = Vec::Zero(d1);
            const Mat K = Mat::Zero(d1, d);
            spec.reaction(t, kappa.head(d), u, K, g);
            return kappa.tail(d1).dot(g);
        };
        break;
    case ReactionKind::general:
        if (d1 != 1) {
            throw ConstructionError(
                "build_enlarged: the pairing <eta, g(u, K)> is not a function of (kappa, Y, Z) "
                "for d1 > 1 with (u, K)-dependent g; supply G_tilde explicitly");
        }
        G = [spec, d](double t, const CVecRef& kappa, double Y, const CVecRef& Z) {
            const double eta = kappa[d];
            if (eta == 0.0) return 0.0;
            thread_local Vec u, g;
            thread_local Mat K;
            u.resize(1);
            g.resize(1);
            K.resize(1, d);
            u[0] = Y / eta;
            K.row(0) = Z.transpose() / eta;
            spec.reaction(t, kappa.head(d), u, K, g);
            return eta * g[0];
        };
        break;
    }
    return build_enlarged(spec, h, std::move(G));
}

EnlargedSpec build_enlarged(const ProblemSpec& spec, const CVecRef& h, ScalarDriverFn G_tilde) {
    spec.check();
    check_direction(spec, h);
    if (!G_tilde) throw ConstructionError("build_enlarged: G_tilde must be set");
    return EnlargedSpec{spec, h, std::move(G_tilde)};
}

EnlargedPaths simulate_enlarged(const EnlargedSpec& enl, double s, const CVecRef& x,
                                const SolverConfig& config) {
    const ProblemSpec& spec = enl.base;
    spec.check();
    config.check();
    if (!(s >= 0.0 && s < spec.T)) throw ConfigError("simulate_enlarged: need 0 <= s < T");
    if (x.size() != spec.d) throw DimensionError("simulate_enlarged: x must have d entries");

    EnlargedPaths p;
    p.grid = TimeGrid(s, spec.T, config.N);
    p.d = spec.d;
    p.d1 = spec.d1;
    p.M = config.M;
    p.seed = config.seed;
    const int d = p.d, d1 = p.d1, N = p.grid.N;
    const double dt = p.grid.dt();
    const auto M = static_cast<std::size_t>(p.M);
    p.increments.resize(M * N * d);
    p.xi.resize(M * (N + 1) * d);
    p.eta.resize(M * (N + 1) * d1);

    for_each_chunk(M, [&](std::size_t, std::size_t begin, std::size_t end) {
        Vec drift_ws(d), eta_next(d1);
        Mat diffusion_ws(d, d), c_ws(d1, d1), coupling_ws(d1, d * d1);
        for (std::size_t m = begin; m < end; ++m) {
            double* xi = p.xi.data() + m * (N + 1) * d;
            double* eta = p.eta.data() + m * (N + 1) * d1;
            double* dws = p.increments.data() + m * N * d;
            Eigen::Map<Vec>(xi, d) = x;
            Eigen::Map<Vec>(eta, d1) = enl.h;
            for (int k = 0; k < N; ++k) {
                const double t = p.grid.t(k);
                Eigen::Map<Vec> dw(dws + k * d, d);
                brownian_increment(p.seed, static_cast<std::int64_t>(m), k, dt, dw);
                Eigen::Map<const Vec> xk(xi + k * d, d);
                Eigen::Map<const Vec> ek(eta + k * d1, d1);
                spec.zero_order(t, xk, c_ws);
                spec.gradient_coupling(t, xk, coupling_ws);
                eta_next = ek;
                eta_next.noalias() += dt * (c_ws * ek);
                for (int i = 0; i < d; ++i) {
                    eta_next.noalias() += dw[i] * (coupling_ws.middleCols(i * d1, d1) * ek);
                }
                Eigen::Map<Vec>(eta + (k + 1) * d1, d1) = eta_next;
                Eigen::Map<Vec> x_next(xi + (k + 1) * d, d);
                euler_state_step(spec, t, dt, xk, dw, drift_ws, diffusion_ws, x_next);
                if (!x_next.allFinite() || !eta_next.allFinite()) {
                    throw EvaluationError("enlarged state is not finite (path " +
                                          std::to_string(m) + ", step " + std::to_string(k) + ")");
                }
            }
        }
    });
    return p;
}

ScalarEstimate solve_scalar(const EnlargedSpec& enl, double s, const CVecRef& x,
                            const SolverConfig& config) {
    const auto paths = simulate_enlarged(enl, s, x, config);
    ScalarSystem system(enl, paths, config.basis_degree);
    detail::EngineSettings settings;
    settings.picard_max = config.picard_max;
    settings.picard_tol = config.picard_tol;
    settings.beta = config.resolved_beta(enl.base);
    settings.ridge = config.ridge;
    settings.store_processes = false;
    const auto result = detail::run_picard(system, settings);

    ScalarEstimate est;
    est.value = result.value[0];
    est.std_error = result.std_error[0];
    est.M = config.M;
    est.N = config.N;
    est.seed = config.seed;
    est.converged = result.converged;
    est.iterations = result.iterations;
    est.picard_residuals = result.picard_residuals;
    return est;
}

// ---------------------------------------------------------------------------
// comparison

double C31Summary::pass_rate() const {
    const int total = terminal_samples + generator_samples;
    if (total == 0) return 1.0;
    return static_cast<double>(terminal_passed + generator_passed) / total;
}

int ComparisonReport::total_violations() const {
    int n = 0;
    for (int v : violations) n += v;
    return n;
}

C31Summary check_C31(const ProblemSpec& spec1, const ProblemSpec& spec2, int sample_count,
                     std::uint64_t rng_seed) {
    spec1.check();
    spec2.check();
    if (spec1.d != spec2.d || spec1.d1 != spec2.d1 || spec1.T != spec2.T) {
        throw DimensionError("check_C31: problems must share (d, d1, T)");
    }
    const int d = spec1.d;
    const int d1 = spec1.d1;
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> half(0.0, 1.0);
    const double rx = spec1.box.x_radius;
    const double ru = spec1.box.u_radius;
    const double rk = spec1.box.k_radius;

    C31Summary summary;
    Vec y1(d1), y2(d1), f1(d1), f2(d1), u_ws(d1), g_ws(d1);
    Mat z1(d1, d), z2(d1, d), k_ws(d1, d);
    for (int done = 0; done < sample_count; done += kBatch) {
        const int batch = std::min(kBatch, sample_count - done);
        Vec x(d);
        for (auto& v : x) v = 0.5 * rx * unit(rng);
        const auto cfg = hypothesis_config(rng_seed + static_cast<std::uint64_t>(done), batch);
        const auto p1 = simulate_forward(spec1, 0.0, x, cfg);
        const auto p2 = simulate_forward(spec2, 0.0, x, cfg);
        for (int m = 0; m < batch; ++m) {
            const Vec zeta1 = p1.gamma_at(m, cfg.N).transpose() * spec1.u0(p1.xi_at(m, cfg.N));
            const Vec zeta2 = p2.gamma_at(m, cfg.N).transpose() * spec2.u0(p2.xi_at(m, cfg.N));
            ++summary.terminal_samples;
            bool ok = true;
            for (int l = 0; l < d1; ++l) {
                if (violates(zeta1[l], zeta2[l], summary.max_terminal_violation)) ok = false;
            }
            if (ok) ++summary.terminal_passed;

            // ii): y1_l <= y2_l (l != m), y1_m = y2_m, equal m-th control rows.
            const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.N));
            const int comp = static_cast<int>(rng() % static_cast<std::uint64_t>(d1));
            const bool tight = half(rng) < 0.25;
            for (int l = 0; l < d1; ++l) {
                y1[l] = ru * unit(rng);
                y2[l] = (l == comp || tight) ? y1[l] : y1[l] + ru * half(rng);
                for (int j = 0; j < d; ++j) {
                    z1(l, j) = rk * unit(rng);
                    z2(l, j) = (l == comp || tight) ? z1(l, j) : rk * unit(rng);
                }
            }
            const double t = p1.grid.t(k);
            generator_f_into(t, p1.xi_at(m, k), p1.gamma_at(m, k), p1.gamma_inv_at(m, k), y1, z1,
                             spec1, u_ws, k_ws, g_ws, f1);
            generator_f_into(t, p2.xi_at(m, k), p2.gamma_at(m, k), p2.gamma_inv_at(m, k), y2, z2,
                             spec2, u_ws, k_ws, g_ws, f2);
            ++summary.generator_samples;
            if (!violates(f1[comp], f2[comp], summary.max_generator_violation)) {
                ++summary.generator_passed;
            }
        }
    }
    return summary;
}

ComparisonReport comparison_harness(const ProblemSpec& spec1, const ProblemSpec& spec2,
                                    double s, const CVecRef& x, const SolverConfig& config,
                                    int n_seeds) {
    if (n_seeds < 1) throw ConfigError("comparison_harness: n_seeds must be >= 1");
    ComparisonReport report;
    report.hypotheses = check_C31(spec1, spec2, 1024, config.seed);
    report.exploratory = !report.hypotheses.satisfied();
    for (int i = 0; i < n_seeds; ++i) {
        SolverConfig cfg = config;
        cfg.seed = config.seed + static_cast<std::uint64_t>(i);
        const Estimate e1 = evaluate_u(spec1, s, x, cfg);
        const Estimate e2 = evaluate_u(spec2, s, x, cfg);
        tally(report, cfg.seed, e1.value, e2.value, e1.std_error, e2.std_error);
    }
    return report;
}

ComparisonReport scalar_comparison_harness(const EnlargedSpec& first, const EnlargedSpec& second,
                                           double s, const CVecRef& x,
                                           const SolverConfig& config, int n_seeds) {
    if (n_seeds < 1) throw ConfigError("scalar_comparison_harness: n_seeds must be >= 1");
    if (first.base.d != second.base.d || first.base.d1 != second.base.d1 ||
        first.base.T != second.base.T) {
        throw DimensionError("scalar_comparison_harness: problems must share (d, d1, T)");
    }
    ComparisonReport report;
    report.hypotheses = check_scalar_hypotheses(first, second, 1024, config.seed);
    report.exploratory = !report.hypotheses.satisfied();
    for (int i = 0; i < n_seeds; ++i) {
        SolverConfig cfg = config;
        cfg.seed = config.seed + static_cast<std::uint64_t>(i);
        const auto e1 = solve_scalar(first, s, x, cfg);
        const auto e2 = solve_scalar(second, s, x, cfg);
        tally(report, cfg.seed, Vec::Constant(1, e1.value), Vec::Constant(1, e2.value),
              Vec::Constant(1, e1.std_error), Vec::Constant(1, e2.std_error));
    }
    return report;
}

} // namespace fbsde
