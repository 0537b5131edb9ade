#include "fbsde/problem.hpp"

#include "fbsde/declarative.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

namespace fbsde {
namespace {

std::string describe(const CVecRef& v) {
    std::ostringstream os;
    os << '(';
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ')';
    return os.str();
}

void require_finite(const CMatRef& value, const char* what, double t, const CVecRef& x) {
    if (!value.allFinite()) {
        std::ostringstream os;
        os << what << " is not finite at t=" << t << ", x=" << describe(x);
        throw EvaluationError(os.str());
    }
}

// Scratch for the linear part of the PDE operator.
struct OperatorScratch {
    Vec a;
    Mat A, c, coupling, AAt, JA;

    void resize(int d, int d1) {
        a.resize(d);
        A.resize(d, d);
        c.resize(d1, d1);
        coupling.resize(d1, d * d1);
        AAt.resize(d, d);
        JA.resize(d1, d);
    }
};

// du/ds + 1/2 Tr(A^T H A) + <a, grad u> + B grad u + c^T u. `hess_rows` is
// d1 x (d*d), row l the column-major Hessian of u_l.
void linear_operator(const ProblemSpec& spec, double s, const CVecRef& x, const CVecRef& u,
                     const CVecRef& du_ds, const CMatRef& jac, const CMatRef& hess_rows,
                     OperatorScratch& ws, VecRef out) {
    const int d = spec.d;
    const int d1 = spec.d1;
    ws.resize(d, d1);
    spec.drift(s, x, ws.a);
    spec.diffusion(s, x, ws.A);
    spec.zero_order(s, x, ws.c);
    spec.gradient_coupling(s, x, ws.coupling);
    ws.AAt.noalias() = ws.A * ws.A.transpose();
    ws.JA.noalias() = jac * ws.A;

    out = du_ds;
    out.noalias() += jac * ws.a;
    out.noalias() += ws.c.transpose() * u;
    for (int l = 0; l < d1; ++l) {
        double trace = 0.0;
        for (int j = 0; j < d; ++j) {
            for (int i = 0; i < d; ++i) trace += ws.AAt(i, j) * hess_rows(l, j * d + i);
        }
        out[l] += 0.5 * trace;
    }
    // B grad u = sum_k C_k^T (J A)_{.k}
    for (int k = 0; k < d; ++k) {
        out.noalias() += ws.coupling.middleCols(k * d1, d1).transpose() * ws.JA.col(k);
    }
}

double frob(const CMatRef& m) { return m.norm(); }

} // namespace

// ---------------------------------------------------------------------------
// ProblemSpec

void ProblemSpec::check() const {
    if (d < 1 || d1 < 1) {
        throw DimensionError("problem '" + name + "': d and d1 must be >= 1, got d=" +
                             std::to_string(d) + ", d1=" + std::to_string(d1));
    }
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw ConstructionError("problem '" + name + "': horizon T must be positive");
    }
    if (!drift || !diffusion || !zero_order || !gradient_coupling || !reaction || !terminal) {
        throw ConstructionError("problem '" + name + "': every coefficient callback must be set");
    }
}

Vec ProblemSpec::a(double t, const CVecRef& x) const {
    Vec out(d);
    drift(t, x, out);
    return out;
}

Mat ProblemSpec::A(double t, const CVecRef& x) const {
    Mat out(d, d);
    diffusion(t, x, out);
    return out;
}

Mat ProblemSpec::c(double t, const CVecRef& x) const {
    Mat out(d1, d1);
    zero_order(t, x, out);
    return out;
}

Mat ProblemSpec::C(double t, const CVecRef& x) const {
    Mat out(d1, d * d1);
    gradient_coupling(t, x, out);
    return out;
}

Vec ProblemSpec::g(double t, const CVecRef& x, const CVecRef& u, const CMatRef& K) const {
    Vec out(d1);
    reaction(t, x, u, K, out);
    return out;
}

Vec ProblemSpec::u0(const CVecRef& x) const {
    Vec out(d1);
    terminal(x, out);
    return out;
}

// ---------------------------------------------------------------------------
// coupling algebra

std::vector<Mat> split_coupling(const CMatRef& blocks, int d) {
    const auto d1 = blocks.rows();
    if (d < 1 || blocks.cols() != d * d1) {
        throw DimensionError("coupling: expected a " + std::to_string(d1) + " x " +
                             std::to_string(d * d1) + " block matrix, got " +
                             std::to_string(blocks.rows()) + " x " +
                             std::to_string(blocks.cols()));
    }
    std::vector<Mat> out;
    out.reserve(d);
    for (int k = 0; k < d; ++k) out.emplace_back(blocks.middleCols(k * d1, d1));
    return out;
}

Mat join_coupling(const std::vector<Mat>& C) {
    if (C.empty()) throw DimensionError("coupling: need at least one matrix");
    const auto d1 = C.front().rows();
    Mat out(d1, d1 * static_cast<Eigen::Index>(C.size()));
    for (std::size_t k = 0; k < C.size(); ++k) {
        if (C[k].rows() != d1 || C[k].cols() != d1) {
            throw DimensionError("coupling: C_" + std::to_string(k + 1) + " is not " +
                                 std::to_string(d1) + " x " + std::to_string(d1));
        }
        out.middleCols(static_cast<Eigen::Index>(k) * d1, d1) = C[k];
    }
    return out;
}

std::vector<Mat> derive_B(const std::vector<Mat>& C, const Mat& A) {
    const auto d = static_cast<Eigen::Index>(C.size());
    if (A.rows() != A.cols()) {
        throw DimensionError("derive_B: operand A must be square, got " +
                             std::to_string(A.rows()) + " x " + std::to_string(A.cols()));
    }
    if (d != A.rows()) {
        throw DimensionError("derive_B: operand C holds " + std::to_string(d) +
                             " matrices but A is " + std::to_string(A.rows()) + " x " +
                             std::to_string(A.cols()));
    }
    if (d == 0) throw DimensionError("derive_B: operand C is empty");
    const auto d1 = C.front().rows();
    for (Eigen::Index q = 0; q < d; ++q) {
        if (C[q].rows() != d1 || C[q].cols() != d1) {
            throw DimensionError("derive_B: operand C_" + std::to_string(q + 1) + " is " +
                                 std::to_string(C[q].rows()) + " x " +
                                 std::to_string(C[q].cols()) + ", expected " +
                                 std::to_string(d1) + " x " + std::to_string(d1));
        }
    }
    std::vector<Mat> B(d, Mat::Zero(d1, d1));
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index q = 0; q < d; ++q) B[i] += A(q, i) * C[q];
    }
    return B;
}

std::vector<Mat> first_order_coupling(const ProblemSpec& spec, double t, const CVecRef& x) {
    auto C = split_coupling(spec.C(t, x), spec.d);
    for (auto& Ck : C) Ck.transposeInPlace();
    return derive_B(C, spec.A(t, x).transpose());
}

Mat gradient_load(const CMatRef& coupling, const CMatRef& A, const CVecRef& u,
                  const CMatRef& jac) {
    const auto d1 = u.size();
    const auto d = A.rows();
    if (jac.rows() != d1 || jac.cols() != d || coupling.rows() != d1 ||
        coupling.cols() != d * d1 || A.cols() != d) {
        throw DimensionError("gradient_load: inconsistent operand shapes");
    }
    Mat K = jac * A;
    for (Eigen::Index k = 0; k < d; ++k) {
        K.col(k).noalias() += coupling.middleCols(k * d1, d1).transpose() * u;
    }
    return K;
}

Vec pde_residual(const ProblemSpec& spec, double s, const CVecRef& x, const SolutionJet& jet) {
    const int d = spec.d;
    const int d1 = spec.d1;
    if (jet.u.size() != d1 || jet.du_ds.size() != d1 || jet.jac.rows() != d1 ||
        jet.jac.cols() != d || static_cast<int>(jet.hess.size()) != d1) {
        throw DimensionError("pde_residual: solution jet does not match (d, d1)");
    }
    Mat hess_rows(d1, d * d);
    for (int l = 0; l < d1; ++l) {
        if (jet.hess[l].rows() != d || jet.hess[l].cols() != d) {
            throw DimensionError("pde_residual: Hessian of component " + std::to_string(l) +
                                 " is not d x d");
        }
        hess_rows.row(l) = Eigen::Map<const Eigen::RowVectorXd>(jet.hess[l].data(), d * d);
    }
    OperatorScratch ws;
    Vec out(d1);
    linear_operator(spec, s, x, jet.u, jet.du_ds, jet.jac, hess_rows, ws, out);
    const Mat K = gradient_load(spec.C(s, x), spec.A(s, x), jet.u, jet.jac);
    out += spec.g(s, x, jet.u, K);
    return out;
}

// ---------------------------------------------------------------------------
// validate

bool ValidationReport::any_flagged() const {
    return std::any_of(entries.begin(), entries.end(),
                       [](const ValidationEntry& e) { return e.flagged; });
}

const ValidationEntry& ValidationReport::at(const std::string& name) const {
    for (const auto& e : entries) {
        if (e.name == name) return e;
    }
    throw LookupError("validation report has no entry '" + name + "'");
}

ValidationReport validate(const ProblemSpec& spec, int sample_count, std::uint64_t rng_seed) {
    spec.check();
    if (sample_count < 2) throw ConfigError("validate: sample_count must be >= 2");

    const int d = spec.d;
    const int d1 = spec.d1;
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> time(0.0, spec.T);
    std::normal_distribution<double> normal;

    const auto box = [&](int rows, int cols, double radius) {
        Mat m(rows, cols);
        for (auto& v : m.reshaped()) v = radius * unit(rng);
        return m;
    };
    const auto nudge = [&](const Mat& base, double radius) {
        Mat m = base;
        for (auto& v : m.reshaped()) v += 1e-3 * radius * unit(rng);
        return m;
    };

    double a_lip = 0, A_lip = 0, c_lip = 0, C_lip = 0, gx_lip = 0, guk_lip = 0, u0_lip = 0;
    double K1 = 0, K2 = 0, L1 = 0, L2 = 0, mu = -INFINITY;

    for (int i = 0; i < sample_count; ++i) {
        const bool local = (i % 2) == 1;
        const double t = time(rng);
        const Vec x1 = box(d, 1, spec.box.x_radius);
        const Vec x2 = local ? Vec(nudge(x1, spec.box.x_radius)) : Vec(box(d, 1, spec.box.x_radius));
        const double dx = (x1 - x2).norm();
        if (dx == 0.0) continue;

        const Vec a1 = spec.a(t, x1), a2 = spec.a(t, x2);
        const Mat A1 = spec.A(t, x1), A2 = spec.A(t, x2);
        require_finite(a1, "drift a", t, x1);
        require_finite(a2, "drift a", t, x2);
        require_finite(A1, "diffusion A", t, x1);
        require_finite(A2, "diffusion A", t, x2);
        a_lip = std::max(a_lip, (a1 - a2).norm() / dx);
        A_lip = std::max(A_lip, frob(A1 - A2) / dx);
        L1 = std::max(L1, ((a1 - a2).squaredNorm() + (A1 - A2).squaredNorm()) / (dx * dx));
        K1 = std::max(K1, (a1.squaredNorm() + A1.squaredNorm()) / (1.0 + x1.squaredNorm()));

        const Mat c1 = spec.c(t, x1), c2 = spec.c(t, x2);
        const Mat C1 = spec.C(t, x1), C2 = spec.C(t, x2);
        require_finite(c1, "zero-order c", t, x1);
        require_finite(c2, "zero-order c", t, x2);
        require_finite(C1, "gradient coupling C", t, x1);
        require_finite(C2, "gradient coupling C", t, x2);
        c_lip = std::max(c_lip, frob(c1 - c2) / dx);
        C_lip = std::max(C_lip, frob(C1 - C2) / dx);
        Vec h(d1);
        for (auto& v : h) v = normal(rng);
        if (h.norm() > 0) {
            const auto apply_C = [&](const Mat& C) {
                Mat out(d1, d);
                for (int k = 0; k < d; ++k) out.col(k) = C.middleCols(k * d1, d1) * h;
                return out;
            };
            const double hh = h.squaredNorm();
            K2 = std::max(K2, ((c1 * h).squaredNorm() + apply_C(C1).squaredNorm()) / hh);
            L2 = std::max(L2, (((c1 - c2) * h).squaredNorm() + apply_C(C1 - C2).squaredNorm()) /
                                  (dx * dx * hh));
        }

        const Vec u1 = box(d1, 1, spec.box.u_radius);
        const Mat Kmat1 = box(d1, d, spec.box.k_radius);
        const Vec u2 = local ? Vec(nudge(u1, spec.box.u_radius)) : Vec(box(d1, 1, spec.box.u_radius));
        const Mat Kmat2 = local ? nudge(Kmat1, spec.box.k_radius) : box(d1, d, spec.box.k_radius);

        const Vec g11 = spec.g(t, x1, u1, Kmat1);
        const Vec g21 = spec.g(t, x2, u1, Kmat1);
        const Vec g12 = spec.g(t, x1, u2, Kmat2);
        const Vec g_u2_k1 = spec.g(t, x1, u2, Kmat1);
        require_finite(g11, "reaction g", t, x1);
        require_finite(g21, "reaction g", t, x2);
        require_finite(g12, "reaction g", t, x1);
        require_finite(g_u2_k1, "reaction g", t, x1);
        gx_lip = std::max(gx_lip, (g11 - g21).norm() / dx);
        const double duk = (u1 - u2).norm() + frob(Kmat1 - Kmat2);
        if (duk > 0) guk_lip = std::max(guk_lip, (g11 - g12).norm() / duk);
        const double du2 = (u1 - u2).squaredNorm();
        if (du2 > 0) {
            mu = std::max(mu, (u1 - u2).dot(g11 - g_u2_k1) / du2);
            guk_lip = std::max(guk_lip, (g11 - g_u2_k1).norm() / std::sqrt(du2));
        }

        const Vec u01 = spec.u0(x1), u02 = spec.u0(x2);
        require_finite(u01, "terminal u0", 0.0, x1);
        require_finite(u02, "terminal u0", 0.0, x2);
        u0_lip = std::max(u0_lip, (u01 - u02).norm() / dx);
    }
    if (!std::isfinite(mu)) mu = 0.0;

    ValidationReport report;
    report.sample_count = sample_count;
    report.seed = rng_seed;
    const auto add = [&](std::string name, double observed, double declared) {
        const bool flagged =
            std::isfinite(declared) && observed > declared * (1.0 + 1e-9) + 1e-12;
        report.entries.push_back({std::move(name), observed, declared, flagged});
    };
    add("a.lipschitz", a_lip, kUndeclared);
    add("A.lipschitz", A_lip, kUndeclared);
    add("c.lipschitz", c_lip, kUndeclared);
    add("C.lipschitz", C_lip, kUndeclared);
    add("g.lipschitz_x", gx_lip, kUndeclared);
    add("g.lipschitz_uK", guk_lip, kUndeclared);
    add("u0.lipschitz", u0_lip, kUndeclared);
    const auto& b = spec.budget;
    add("K1", K1, b.K1);
    add("K2", K2, b.K2);
    add("L1", L1, b.L1);
    add("L2", L2, b.L2);
    add("L3", gx_lip, b.L3);
    add("L", guk_lip, b.L);
    add("mu", mu, b.mu);
    add("C0", u0_lip, b.C0);
    return report;
}

// ---------------------------------------------------------------------------
// catalog

std::vector<std::string> catalog_names() {
    return {"heat-1d", "rotation-coupling", "first-order-coupling", "manufactured-quasilinear"};
}

ProblemSpec catalog(const std::string& name) {
    if (name == "manufactured-quasilinear") return manufactured_quasilinear().base;
    return build_problem(declarative_catalog(name), name);
}

namespace {

using Complex = std::complex<double>;
using CMat2 = Eigen::Matrix<Complex, 2, 2>;

// exp of a 2 x 2 complex matrix: e^{tr/2} [cosh(D) I + sinh(D)/D (M - tr/2 I)],
// D^2 = ((m00 - m11)/2)^2 + m01 m10.
CMat2 expm2(const CMat2& m) {
    const Complex half_trace = 0.5 * (m(0, 0) + m(1, 1));
    const CMat2 shifted = m - half_trace * CMat2::Identity();
    const Complex delta = std::sqrt(shifted(0, 0) * shifted(0, 0) + m(0, 1) * m(1, 0));
    const Complex sinhc = std::abs(delta) < 1e-8 ? Complex(1.0) + delta * delta / 6.0
                                                 : std::sinh(delta) / delta;
    return std::exp(half_trace) * (std::cosh(delta) * CMat2::Identity() + sinhc * shifted);
}

} // namespace

std::optional<ReferenceSolution> reference_solution(const std::string& name) {
    if (name == "heat-1d") {
        return ReferenceSolution([](double s, const CVecRef& x) {
            Vec u(1);
            u[0] = x[0] * x[0] + (1.0 - s);
            return u;
        });
    }
    if (name == "rotation-coupling") {
        return ReferenceSolution([](double s, const CVecRef& x) {
            const double theta = std::numbers::pi / 2 - s;
            const double damp = std::exp(-0.5 * theta);
            const double c0 = std::cos(x[0]) * damp, s0 = std::sin(x[0]) * damp;
            Vec u(2);
            u[0] = std::cos(theta) * c0 - std::sin(theta) * s0;
            u[1] = std::sin(theta) * c0 + std::cos(theta) * s0;
            return u;
        });
    }
    if (name == "first-order-coupling") {
        return ReferenceSolution([](double s, const CVecRef& x) {
            // u = Re[exp(theta (-1/2 I + i C^T)) v e^{ix}], v = (1, -i).
            const Mat C = declarative_catalog("first-order-coupling").C.constant;
            const double theta = 1.0 - s;
            CMat2 gen;
            for (int r = 0; r < 2; ++r) {
                for (int q = 0; q < 2; ++q) {
                    gen(r, q) = Complex(r == q ? -0.5 : 0.0, C(q, r)) * theta;
                }
            }
            const Eigen::Matrix<Complex, 2, 1> v(Complex(1, 0), Complex(0, -1));
            const Eigen::Matrix<Complex, 2, 1> w = expm2(gen) * v * std::exp(Complex(0, x[0]));
            Vec u(2);
            u << w[0].real(), w[1].real();
            return u;
        });
    }
    if (name == "manufactured-quasilinear") {
        auto problem = manufactured_quasilinear();
        return ReferenceSolution(
            [problem](double s, const CVecRef& x) { return problem.exact(s, x); });
    }
    const auto names = catalog_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        catalog(name);  // throws the lookup error
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// manufactured solutions

Vec ManufacturedProblem::exact(double s, const CVecRef& x) const {
    Vec out(base.d1);
    u_star.value(s, x, out);
    return out;
}

SolutionJet ManufacturedProblem::jet(double s, const CVecRef& x) const {
    const int d = base.d;
    const int d1 = base.d1;
    SolutionJet j;
    j.u.resize(d1);
    j.du_ds.resize(d1);
    j.jac.resize(d1, d);
    Mat hess_rows(d1, d * d);
    u_star.value(s, x, j.u);
    u_star.ds(s, x, j.du_ds);
    u_star.jac(s, x, j.jac);
    u_star.hess(s, x, hess_rows);
    for (int l = 0; l < d1; ++l) {
        const Vec row = hess_rows.row(l).transpose();
        j.hess.emplace_back(Eigen::Map<const Mat>(row.data(), d, d));
    }
    return j;
}

ManufacturedProblem manufacture(const ProblemSpec& base_in, ManufacturedSolution u_star,
                                double lambda, PsiFn psi) {
    if (!u_star.value || !u_star.ds || !u_star.jac || !u_star.hess) {
        throw ConstructionError(
            "manufacture: u_star needs value, ds, jac and hess callbacks (no numeric "
            "differentiation is performed)");
    }
    if (lambda != 0.0 && !psi) {
        throw ConstructionError("manufacture: lambda != 0 requires a psi callback");
    }
    if (!(lambda >= 0.0)) throw ConstructionError("manufacture: lambda must be >= 0");
    if (!base_in.drift || !base_in.diffusion || !base_in.zero_order ||
        !base_in.gradient_coupling) {
        throw ConstructionError("manufacture: base coefficients a, A, c, C must be set");
    }

    ProblemSpec spec = base_in;
    const int d = spec.d;
    const int d1 = spec.d1;

    struct Scratch {
        OperatorScratch op;
        Vec u, du, gt, psi_star, psi_here;
        Mat jac, hess, K;
    };

    // Copies of the base callbacks so that the closure does not refer back to
    // the spec it is stored in.
    ProblemSpec linear = spec;
    linear.reaction = [](double, const CVecRef&, const CVecRef&, const CMatRef&, VecRef out) {
        out.setZero();
    };
    linear.terminal = [](const CVecRef&, VecRef out) { out.setZero(); };

    spec.reaction = [linear, u_star, lambda, psi, d, d1](double s, const CVecRef& x,
                                                        const CVecRef& u, const CMatRef& K,
                                                        VecRef out) {
        thread_local Scratch ws;
        ws.u.resize(d1);
        ws.du.resize(d1);
        ws.gt.resize(d1);
        ws.jac.resize(d1, d);
        ws.hess.resize(d1, d * d);
        u_star.value(s, x, ws.u);
        u_star.ds(s, x, ws.du);
        u_star.jac(s, x, ws.jac);
        u_star.hess(s, x, ws.hess);
        linear_operator(linear, s, x, ws.u, ws.du, ws.jac, ws.hess, ws.op, ws.gt);
        out = -ws.gt;
        if (lambda != 0.0) {
            // K(u*, grad u*) = J A + [C_k^T u*]_k, with A and C already in ws.op.
            ws.K.noalias() = ws.jac * ws.op.A;
            for (int k = 0; k < d; ++k) {
                ws.K.col(k).noalias() += ws.op.coupling.middleCols(k * d1, d1).transpose() * ws.u;
            }
            ws.psi_star.resize(d1);
            ws.psi_here.resize(d1);
            psi(ws.u, ws.K, ws.psi_star);
            psi(u, K, ws.psi_here);
            out += lambda * (ws.psi_here - ws.psi_star);
        }
    };
    const double T = spec.T;
    spec.terminal = [u_star, T](const CVecRef& x, VecRef out) { u_star.value(T, x, out); };
    spec.reaction_kind = lambda == 0.0 ? ReactionKind::state_only : ReactionKind::general;

    ManufacturedProblem result;
    result.base = std::move(spec);
    result.u_star = std::move(u_star);
    result.lambda = lambda;
    return result;
}

ManufacturedProblem manufactured_quasilinear() {
    constexpr double T = 1.0;
    ProblemSpec base;
    base.name = "manufactured-quasilinear";
    base.d = 1;
    base.d1 = 2;
    base.T = T;
    base.drift = [](double, const CVecRef&, VecRef out) { out[0] = 0.1; };
    base.diffusion = [](double, const CVecRef&, MatRef out) { out(0, 0) = 0.8; };
    base.zero_order = [](double, const CVecRef&, MatRef out) {
        out << -0.2, 0.3, -0.1, 0.1;
    };
    base.gradient_coupling = [](double, const CVecRef&, MatRef out) {
        out << 0.1, 0.2, -0.15, 0.05;
    };

    ManufacturedSolution u;
    // u*(s, x) = e^{-(T-s)} (sin x, cos x)
    u.value = [](double s, const CVecRef& x, VecRef out) {
        const double e = std::exp(-(T - s));
        out << e * std::sin(x[0]), e * std::cos(x[0]);
    };
    u.ds = u.value;
    u.jac = [](double s, const CVecRef& x, MatRef out) {
        const double e = std::exp(-(T - s));
        out << e * std::cos(x[0]), -e * std::sin(x[0]);
    };
    u.hess = [](double s, const CVecRef& x, MatRef out) {
        const double e = std::exp(-(T - s));
        out << -e * std::sin(x[0]), -e * std::cos(x[0]);
    };

    // Lipschitz 1 in (u, K): |d psi| <= |du| + |dK| / 2.
    PsiFn psi = [](const CVecRef& v, const CMatRef& K, VecRef out) {
        out << std::sin(v[1]) + 0.5 * std::sin(K(0, 0)), std::sin(v[0]) - 0.5 * std::cos(K(1, 0));
    };

    constexpr double lambda = 0.45;
    auto problem = manufacture(base, std::move(u), lambda, std::move(psi));
    auto& b = problem.base.budget;
    b.K1 = 0.65;
    b.K2 = 0.21;
    b.L1 = 0.0;
    b.L2 = 0.0;
    b.L3 = 4.0;
    b.L = lambda;
    b.mu = lambda;
    b.C0 = 1.0;
    problem.base.box = BudgetBox{10.0, 1.5, 1.5};
    return problem;
}

} // namespace fbsde
