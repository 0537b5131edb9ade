#include "fbsde/forward.hpp"

#include "fbsde/parallel.hpp"
#include "fbsde/rng.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace fbsde {
namespace {

static_assert(std::endian::native == std::endian::little,
              "path dump assumes a little-endian host");

void invert_small(const Mat& F, Mat& out) {
    const auto n = F.rows();
    if (n == 1) {
        out(0, 0) = 1.0 / F(0, 0);
    } else if (n == 2) {
        const double det = F(0, 0) * F(1, 1) - F(0, 1) * F(1, 0);
        out(0, 0) = F(1, 1) / det;
        out(0, 1) = -F(0, 1) / det;
        out(1, 0) = -F(1, 0) / det;
        out(1, 1) = F(0, 0) / det;
    } else {
        out = F.partialPivLu().inverse();
    }
}

template <class T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw Error("read_paths: truncated header");
    return value;
}

void put_array(std::ostream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_array(std::istream& in, std::vector<double>& v, std::size_t n) {
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw Error("read_paths: truncated array data");
}

} // namespace

TimeGrid::TimeGrid(double s_, double T_, int N_) : s(s_), T(T_), N(N_) {
    if (N < 1) throw ConfigError("time grid: N must be >= 1");
    if (!(T > s)) throw ConfigError("time grid: need s < T");
}

std::vector<double> TimeGrid::points() const {
    std::vector<double> out(static_cast<std::size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) out[k] = t(k);
    return out;
}

void euler_state_step(const ProblemSpec& spec, double t, double dt, const CVecRef& xi,
                      const CVecRef& dw, VecRef drift_ws, MatRef diffusion_ws, VecRef out) {
    spec.drift(t, xi, drift_ws);
    spec.diffusion(t, xi, diffusion_ws);
    out = xi;
    out += dt * drift_ws;
    out.noalias() += diffusion_ws * dw;
}

void step_factor(const ProblemSpec& spec, double t, double dt, const CVecRef& xi,
                 const CVecRef& dw, StepFactor& out, MatRef c_ws, MatRef coupling_ws) {
    const int d1 = spec.d1;
    spec.zero_order(t, xi, c_ws);
    spec.gradient_coupling(t, xi, coupling_ws);
    out.F.resize(d1, d1);
    out.F_inv.resize(d1, d1);
    out.F.setIdentity();
    out.F += dt * c_ws;
    for (int i = 0; i < spec.d; ++i) out.F += dw[i] * coupling_ws.middleCols(i * d1, d1);
    if (!out.F.allFinite()) throw EvaluationError("step factor is not finite");
    const double det = out.F.determinant();
    if (!(std::abs(det) >= 1e-14)) {
        std::ostringstream os;
        os << "singular step factor: det=" << det << ", |F|=" << out.F.norm();
        throw SimulationError(os.str());
    }
    invert_small(out.F, out.F_inv);
}

void brownian_increment(std::uint64_t seed, std::int64_t m, int k, double dt, VecRef out) {
    NormalStream(seed).fill(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(k),
                            out.data(), static_cast<int>(out.size()));
    out *= std::sqrt(dt);
}

ForwardPaths simulate_forward(const ProblemSpec& spec, double s, const CVecRef& x,
                              const SolverConfig& config) {
    spec.check();
    config.check();
    if (!(s >= 0.0 && s < spec.T)) throw ConfigError("simulate_forward: need 0 <= s < T");
    if (x.size() != spec.d) {
        throw DimensionError("simulate_forward: x has " + std::to_string(x.size()) +
                             " entries, expected d=" + std::to_string(spec.d));
    }

    ForwardPaths p;
    p.grid = TimeGrid(s, spec.T, config.N);
    p.d = spec.d;
    p.d1 = spec.d1;
    p.M = config.M;
    p.start_s = s;
    p.start_x = x;
    p.seed = config.seed;

    const int d = p.d;
    const int d1 = p.d1;
    const int N = p.grid.N;
    const auto M = static_cast<std::size_t>(p.M);
    const double dt = p.grid.dt();
    const std::size_t block = static_cast<std::size_t>(d1) * d1;
    p.increments.resize(M * N * d);
    p.xi.resize(M * (N + 1) * d);
    p.gamma.resize(M * (N + 1) * block);
    p.gamma_inv.resize(M * (N + 1) * block);
    const bool trivial = spec.coupling_free;

    for_each_chunk(M, [&](std::size_t, std::size_t begin, std::size_t end) {
        Vec drift_ws(d);
        Mat diffusion_ws(d, d), c_ws(d1, d1), coupling_ws(d1, d * d1);
        StepFactor factor;
        for (std::size_t m = begin; m < end; ++m) {
            double* xi = p.xi.data() + m * (N + 1) * d;
            double* dws = p.increments.data() + m * N * d;
            double* gam = p.gamma.data() + m * (N + 1) * block;
            double* gin = p.gamma_inv.data() + m * (N + 1) * block;
            Eigen::Map<Vec>(xi, d) = x;
            Eigen::Map<Mat>(gam, d1, d1).setIdentity();
            Eigen::Map<Mat>(gin, d1, d1).setIdentity();
            for (int k = 0; k < N; ++k) {
                const double t = p.grid.t(k);
                Eigen::Map<Vec> dw(dws + k * d, d);
                brownian_increment(p.seed, static_cast<std::int64_t>(m), k, dt, dw);
                Eigen::Map<const Vec> xk(xi + k * d, d);
                Eigen::Map<Mat> g_next(gam + (k + 1) * block, d1, d1);
                Eigen::Map<Mat> gi_next(gin + (k + 1) * block, d1, d1);
                if (trivial) {
                    g_next.setIdentity();
                    gi_next.setIdentity();
                } else {
                    try {
                        step_factor(spec, t, dt, xk, dw, factor, c_ws, coupling_ws);
                    } catch (const Error& e) {
                        std::ostringstream os;
                        os << e.what() << " (path " << m << ", step " << k << ", t=" << t << ")";
                        if (dynamic_cast<const SimulationError*>(&e)) throw SimulationError(os.str());
                        throw EvaluationError(os.str());
                    }
                    g_next.noalias() = factor.F * Eigen::Map<const Mat>(gam + k * block, d1, d1);
                    gi_next.noalias() =
                        Eigen::Map<const Mat>(gin + k * block, d1, d1) * factor.F_inv;
                }
                Eigen::Map<Vec> x_next(xi + (k + 1) * d, d);
                euler_state_step(spec, t, dt, xk, dw, drift_ws, diffusion_ws, x_next);
                if (!x_next.allFinite()) {
                    std::ostringstream os;
                    os << "forward state is not finite (path " << m << ", step " << k
                       << ", t=" << t << ")";
                    throw EvaluationError(os.str());
                }
            }
        }
    });
    return p;
}

double gamma_compose_check(const ProblemSpec& spec, const ForwardPaths& paths, int k1, int k2,
                           int k3) {
    if (!(0 <= k1 && k1 <= k2 && k2 <= k3 && k3 <= paths.N())) {
        throw DimensionError("gamma_compose_check: need 0 <= k1 <= k2 <= k3 <= N");
    }
    if (spec.d != paths.d || spec.d1 != paths.d1) {
        throw DimensionError("gamma_compose_check: spec does not match the paths");
    }
    const int d1 = paths.d1;
    const double dt = paths.grid.dt();
    std::vector<double> partial(chunk_count(static_cast<std::size_t>(paths.M)), 0.0);
    for_each_chunk(static_cast<std::size_t>(paths.M),
                   [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Mat c_ws(d1, d1), coupling_ws(d1, spec.d * d1);
        StepFactor factor;
        Mat left(d1, d1), right(d1, d1), whole(d1, d1), tmp(d1, d1);
        double worst = 0.0;
        for (std::size_t m = begin; m < end; ++m) {
            left.setIdentity();
            right.setIdentity();
            whole.setIdentity();
            for (int k = k1; k < k3; ++k) {
                const auto mi = static_cast<std::int64_t>(m);
                step_factor(spec, paths.grid.t(k), dt, paths.xi_at(mi, k), paths.dw(mi, k),
                            factor, c_ws, coupling_ws);
                tmp.noalias() = factor.F * whole;
                whole = tmp;
                Mat& part = k < k2 ? right : left;
                tmp.noalias() = factor.F * part;
                part = tmp;
            }
            tmp.noalias() = left * right;
            worst = std::max(worst, (tmp - whole).cwiseAbs().maxCoeff());
        }
        partial[chunk] = worst;
    });
    double worst = 0.0;
    for (double v : partial) worst = std::max(worst, v);
    return worst;
}

double gamma_inverse_check(const ForwardPaths& paths) {
    const int d1 = paths.d1;
    std::vector<double> partial(chunk_count(static_cast<std::size_t>(paths.M)), 0.0);
    for_each_chunk(static_cast<std::size_t>(paths.M),
                   [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Mat prod(d1, d1);
        double worst = 0.0;
        for (std::size_t m = begin; m < end; ++m) {
            for (int k = 0; k <= paths.N(); ++k) {
                const auto mi = static_cast<std::int64_t>(m);
                prod.noalias() = paths.gamma_at(mi, k) * paths.gamma_inv_at(mi, k);
                prod.diagonal().array() -= 1.0;
                worst = std::max(worst, prod.cwiseAbs().maxCoeff());
            }
        }
        partial[chunk] = worst;
    });
    double worst = 0.0;
    for (double v : partial) worst = std::max(worst, v);
    return worst;
}

void write_paths(const ForwardPaths& p, std::ostream& out) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p.d));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p.d1));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p.M));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p.grid.N));
    put<double>(out, p.grid.s);
    put<double>(out, p.grid.T);
    put<std::uint64_t>(out, p.seed);
    put_array(out, p.increments);
    put_array(out, p.xi);
    put_array(out, p.gamma);
    put_array(out, p.gamma_inv);
    if (!out) throw Error("write_paths: stream failure");
}

ForwardPaths read_paths(std::istream& in) {
    ForwardPaths p;
    p.d = static_cast<int>(get<std::uint64_t>(in));
    p.d1 = static_cast<int>(get<std::uint64_t>(in));
    p.M = static_cast<std::int64_t>(get<std::uint64_t>(in));
    const auto N = static_cast<int>(get<std::uint64_t>(in));
    const double s = get<double>(in);
    const double T = get<double>(in);
    p.seed = get<std::uint64_t>(in);
    p.grid = TimeGrid(s, T, N);
    p.start_s = s;
    const auto M = static_cast<std::size_t>(p.M);
    const std::size_t block = static_cast<std::size_t>(p.d1) * p.d1;
    get_array(in, p.increments, M * N * p.d);
    get_array(in, p.xi, M * (N + 1) * p.d);
    get_array(in, p.gamma, M * (N + 1) * block);
    get_array(in, p.gamma_inv, M * (N + 1) * block);
    if (M > 0) p.start_x = Eigen::Map<const Vec>(p.xi.data(), p.d);
    return p;
}

} // namespace fbsde
