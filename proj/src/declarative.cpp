#include "fbsde/declarative.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace fbsde {
namespace {

std::string shape(const Mat& m) {
    return std::to_string(m.rows()) + " x " + std::to_string(m.cols());
}

void check_field(const AffineField& f, Eigen::Index rows, Eigen::Index cols, int d,
                 const std::string& what) {
    if (f.constant.rows() != rows || f.constant.cols() != cols) {
        throw DimensionError(what + ": constant is " + shape(f.constant) + ", expected " +
                             std::to_string(rows) + " x " + std::to_string(cols));
    }
    if (!f.slopes.empty() && static_cast<int>(f.slopes.size()) != d) {
        throw DimensionError(what + ": expected " + std::to_string(d) + " slopes, got " +
                             std::to_string(f.slopes.size()));
    }
    for (std::size_t j = 0; j < f.slopes.size(); ++j) {
        if (f.slopes[j].rows() != rows || f.slopes[j].cols() != cols) {
            throw DimensionError(what + ": slope " + std::to_string(j) + " is " +
                                 shape(f.slopes[j]) + ", expected " + shape(f.constant));
        }
    }
    if (!f.constant.allFinite()) throw ConstructionError(what + ": non-finite constant");
    for (const auto& s : f.slopes) {
        if (!s.allFinite()) throw ConstructionError(what + ": non-finite slope");
    }
}

// Writes constant + sum_j x_j slopes[j] into out.
void eval_field(const AffineField& f, const CVecRef& x, MatRef out) {
    out = f.constant;
    for (std::size_t j = 0; j < f.slopes.size(); ++j) out += x[j] * f.slopes[j];
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

double terminal_term(const TerminalTerm& term, const CVecRef& x) {
    switch (term.kind) {
    case TerminalTerm::Kind::poly: {
        double v = term.coef;
        for (std::size_t j = 0; j < term.powers.size(); ++j) {
            v *= std::pow(x[static_cast<Eigen::Index>(j)], term.powers[j]);
        }
        return v;
    }
    case TerminalTerm::Kind::sin:
    case TerminalTerm::Kind::cos: {
        double arg = term.phase;
        for (std::size_t j = 0; j < term.freq.size(); ++j) {
            arg += term.freq[j] * x[static_cast<Eigen::Index>(j)];
        }
        return term.coef * (term.kind == TerminalTerm::Kind::sin ? std::sin(arg) : std::cos(arg));
    }
    }
    return 0.0;
}

} // namespace

bool AffineField::is_zero() const {
    if (!constant.isZero(0.0)) return false;
    for (const auto& s : slopes) {
        if (!s.isZero(0.0)) return false;
    }
    return true;
}

bool DeclarativeProblem::operator==(const DeclarativeProblem& o) const {
    const auto& b = budget;
    const auto& ob = o.budget;
    return d == o.d && d1 == o.d1 && T == o.T && a == o.a && A == o.A && c == o.c &&
           C == o.C && g == o.g && u0 == o.u0 && same(b.K1, ob.K1) && same(b.K2, ob.K2) &&
           same(b.L1, ob.L1) && same(b.L2, ob.L2) && same(b.L3, ob.L3) && same(b.L, ob.L) &&
           same(b.mu, ob.mu) && same(b.C0, ob.C0) && box.x_radius == o.box.x_radius &&
           box.u_radius == o.box.u_radius && box.k_radius == o.box.k_radius;
}

AffineField zero_field(int rows, int cols) { return AffineField{Mat::Zero(rows, cols), {}}; }

AffineField constant_field(Mat value) { return AffineField{std::move(value), {}}; }

ProblemSpec build_problem(const DeclarativeProblem& decl, std::string name) {
    const int d = decl.d;
    const int d1 = decl.d1;
    if (d < 1 || d1 < 1) {
        throw DimensionError("problem: d and d1 must be >= 1, got d=" + std::to_string(d) +
                             ", d1=" + std::to_string(d1));
    }
    check_field(decl.a, d, 1, d, "a");
    check_field(decl.A, d, d, d, "A");
    check_field(decl.c, d1, d1, d, "c");
    check_field(decl.C, d1, d * d1, d, "C");

    bool state_only = true;
    for (std::size_t i = 0; i < decl.g.size(); ++i) {
        const auto& term = decl.g[i];
        const std::string what = "g[" + std::to_string(i) + "]";
        Eigen::Index rows = d1, cols = 1;
        switch (term.kind) {
        case ReactionTerm::Kind::constant: cols = 1; break;
        case ReactionTerm::Kind::linear_x: cols = d; break;
        case ReactionTerm::Kind::linear_u:
        case ReactionTerm::Kind::sin_u: cols = d1; state_only = false; break;
        case ReactionTerm::Kind::linear_K: cols = d; state_only = false; break;
        case ReactionTerm::Kind::norm_u: rows = 1; cols = 1; state_only = false; break;
        }
        if (term.weight.rows() != rows || term.weight.cols() != cols) {
            throw DimensionError(what + ": weight is " + shape(term.weight) + ", expected " +
                                 std::to_string(rows) + " x " + std::to_string(cols));
        }
        if (!term.weight.allFinite()) throw ConstructionError(what + ": non-finite weight");
    }

    if (static_cast<int>(decl.u0.size()) != d1) {
        throw DimensionError("u0: expected " + std::to_string(d1) + " components, got " +
                             std::to_string(decl.u0.size()));
    }
    for (std::size_t l = 0; l < decl.u0.size(); ++l) {
        for (const auto& term : decl.u0[l]) {
            const std::string what = "u0[" + std::to_string(l) + "]";
            if (term.kind == TerminalTerm::Kind::poly) {
                if (!term.powers.empty() && static_cast<int>(term.powers.size()) != d) {
                    throw DimensionError(what + ": powers must have " + std::to_string(d) +
                                         " entries");
                }
                for (int p : term.powers) {
                    if (p < 0) throw ConstructionError(what + ": negative power");
                }
            } else if (static_cast<int>(term.freq.size()) != d) {
                throw DimensionError(what + ": freq must have " + std::to_string(d) + " entries");
            }
        }
    }
    if (!(decl.T > 0.0) || !std::isfinite(decl.T)) {
        throw ConstructionError("problem: horizon T must be positive");
    }

    ProblemSpec spec;
    spec.name = std::move(name);
    spec.d = d;
    spec.d1 = d1;
    spec.T = decl.T;
    spec.budget = decl.budget;
    spec.box = decl.box;
    spec.coupling_free = decl.c.is_zero() && decl.C.is_zero();
    spec.reaction_kind = decl.g.empty() ? ReactionKind::zero
                         : state_only  ? ReactionKind::state_only
                                       : ReactionKind::general;

    spec.drift = [f = decl.a](double, const CVecRef& x, VecRef out) {
        out = f.constant.col(0);
        for (std::size_t j = 0; j < f.slopes.size(); ++j) out += x[j] * f.slopes[j].col(0);
    };
    spec.diffusion = [f = decl.A](double, const CVecRef& x, MatRef out) { eval_field(f, x, out); };
    spec.zero_order = [f = decl.c](double, const CVecRef& x, MatRef out) { eval_field(f, x, out); };
    spec.gradient_coupling = [f = decl.C](double, const CVecRef& x, MatRef out) {
        eval_field(f, x, out);
    };
    spec.reaction = [terms = decl.g](double, const CVecRef& x, const CVecRef& u,
                                     const CMatRef& K, VecRef out) {
        out.setZero();
        for (const auto& term : terms) {
            const Mat& w = term.weight;
            switch (term.kind) {
            case ReactionTerm::Kind::constant: out += w.col(0); break;
            case ReactionTerm::Kind::linear_x: out.noalias() += w * x; break;
            case ReactionTerm::Kind::linear_u: out.noalias() += w * u; break;
            case ReactionTerm::Kind::sin_u: out.noalias() += w * u.array().sin().matrix(); break;
            case ReactionTerm::Kind::linear_K:
                out += w.cwiseProduct(K).rowwise().sum();
                break;
            case ReactionTerm::Kind::norm_u: out += w(0, 0) * u.norm() * u; break;
            }
        }
    };
    spec.terminal = [terms = decl.u0](const CVecRef& x, VecRef out) {
        for (std::size_t l = 0; l < terms.size(); ++l) {
            double v = 0.0;
            for (const auto& term : terms[l]) v += terminal_term(term, x);
            out[static_cast<Eigen::Index>(l)] = v;
        }
    };
    spec.check();
    return spec;
}

DeclarativeProblem declarative_catalog(const std::string& name) {
    using K = TerminalTerm::Kind;
    DeclarativeProblem p;
    if (name == "heat-1d") {
        p.d = 1;
        p.d1 = 1;
        p.T = 1.0;
        p.a = zero_field(1, 1);
        p.A = constant_field(Mat::Identity(1, 1));
        p.c = zero_field(1, 1);
        p.C = zero_field(1, 1);
        p.u0 = {{TerminalTerm{K::poly, 1.0, {2}, {}, 0.0}}};
        p.budget = {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 20.0};
        return p;
    }
    if (name == "rotation-coupling" || name == "first-order-coupling") {
        p.d = 1;
        p.d1 = 2;
        p.a = zero_field(1, 1);
        p.A = constant_field(Mat::Identity(1, 1));
        p.u0 = {{TerminalTerm{K::cos, 1.0, {}, {1.0}, 0.0}},
                {TerminalTerm{K::sin, 1.0, {}, {1.0}, 0.0}}};
        if (name == "rotation-coupling") {
            p.T = std::numbers::pi / 2;
            Mat c(2, 2);
            c << 0.0, 1.0, -1.0, 0.0;
            p.c = constant_field(c);
            p.C = zero_field(2, 2);
            p.budget = {1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0};
        } else {
            p.T = 1.0;
            Mat C(2, 2);
            C << 0.3, 0.5, -0.2, 0.1;
            p.c = zero_field(2, 2);
            p.C = constant_field(C);
            p.budget = {1.0, 0.35, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0};
        }
        return p;
    }
    if (name == "manufactured-quasilinear") {
        throw LookupError("catalog entry 'manufactured-quasilinear' has no declarative form");
    }
    std::ostringstream os;
    os << "unknown catalog entry '" << name << "'; available:";
    for (const auto& n : catalog_names()) os << ' ' << n;
    throw LookupError(os.str());
}

} // namespace fbsde
