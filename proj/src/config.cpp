#include "fbsde/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <set>

namespace fbsde {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ConfigError((path.empty() ? std::string("config") : path) + ": " + message);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : j.items()) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                    [&](const char* a) { return key == a; });
        if (!ok) {
            std::string list;
            for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
            fail(join(path, key), "unknown key (allowed: " + list + ")");
        }
    }
}

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
}

std::int64_t as_int(const json& j, const std::string& path) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) {
            return static_cast<std::int64_t>(v);
        }
    }
    fail(path, "expected an integer");
}

std::uint64_t as_uint(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    const auto v = as_int(j, path);
    if (v < 0) fail(path, "expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

std::string shape_text(Eigen::Index rows, Eigen::Index cols) {
    return std::to_string(rows) + " x " + std::to_string(cols);
}

// A vector of n numbers; a bare number is accepted when n == 1.
Vec as_vector(const json& j, const std::string& path, Eigen::Index n) {
    if (n == 1 && j.is_number()) return Vec::Constant(1, as_double(j, path));
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
        fail(path, "expected a list of " + std::to_string(n) + " numbers");
    }
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = as_double(j[i], index(path, i));
    return v;
}

std::vector<double> as_list(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], index(path, i)));
    return out;
}

// A rows x cols matrix as a list of rows; a bare number is accepted for 1 x 1.
Mat as_matrix(const json& j, const std::string& path, Eigen::Index rows, Eigen::Index cols) {
    if (rows == 1 && cols == 1 && j.is_number()) return Mat::Constant(1, 1, as_double(j, path));
    const std::string expected = "expected a " + shape_text(rows, cols) + " matrix (list of rows)";
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) fail(path, expected);
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) fail(path, expected);
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = as_double(row[c], index(index(path, r), c));
        }
    }
    return m;
}

// A list of d matrices, each d1 x d1, joined into block form.
Mat as_coupling(const json& j, const std::string& path, int d, int d1) {
    if (!j.is_array() || static_cast<int>(j.size()) != d) {
        fail(path, "expected a list of " + std::to_string(d) + " matrices, each " +
                       shape_text(d1, d1));
    }
    std::vector<Mat> blocks;
    for (int k = 0; k < d; ++k) blocks.push_back(as_matrix(j[k], index(path, k), d1, d1));
    return join_coupling(blocks);
}

enum class FieldShape { vector, matrix, coupling };

AffineField as_field(const json& j, const std::string& path, FieldShape shape, int d, int rows,
                     int cols) {
    const auto value = [&](const json& v, const std::string& p) -> Mat {
        switch (shape) {
        case FieldShape::vector: return as_vector(v, p, rows);
        case FieldShape::matrix: return as_matrix(v, p, rows, cols);
        case FieldShape::coupling: return as_coupling(v, p, d, rows);
        }
        return {};
    };
    AffineField f;
    if (j.is_object()) {
        check_keys(j, path, {"constant", "slopes"});
        f.constant = j.contains("constant") ? value(j["constant"], join(path, "constant"))
                                            : Mat::Zero(rows, shape == FieldShape::vector ? 1 : cols);
        if (j.contains("slopes")) {
            const auto& s = j["slopes"];
            const std::string sp = join(path, "slopes");
            if (!s.is_array() || static_cast<int>(s.size()) != d) {
                fail(sp, "expected one slope per state coordinate (" + std::to_string(d) + ")");
            }
            for (int k = 0; k < d; ++k) f.slopes.push_back(value(s[k], index(sp, k)));
        }
        return f;
    }
    f.constant = value(j, path);
    return f;
}

ReactionTerm as_reaction(const json& j, const std::string& path, int d, int d1) {
    expect_object(j, path);
    check_keys(j, path, {"kind", "weight"});
    if (!j.contains("kind")) fail(join(path, "kind"), "missing required field");
    if (!j.contains("weight")) fail(join(path, "weight"), "missing required field");
    const std::string kind = as_string(j["kind"], join(path, "kind"));
    const std::string wp = join(path, "weight");
    ReactionTerm t;
    if (kind == "constant") {
        t.kind = ReactionTerm::Kind::constant;
        t.weight = as_vector(j["weight"], wp, d1);
    } else if (kind == "linear_x") {
        t.kind = ReactionTerm::Kind::linear_x;
        t.weight = as_matrix(j["weight"], wp, d1, d);
    } else if (kind == "linear_u") {
        t.kind = ReactionTerm::Kind::linear_u;
        t.weight = as_matrix(j["weight"], wp, d1, d1);
    } else if (kind == "sin_u") {
        t.kind = ReactionTerm::Kind::sin_u;
        t.weight = as_matrix(j["weight"], wp, d1, d1);
    } else if (kind == "linear_K") {
        t.kind = ReactionTerm::Kind::linear_K;
        t.weight = as_matrix(j["weight"], wp, d1, d);
    } else if (kind == "norm_u") {
        t.kind = ReactionTerm::Kind::norm_u;
        t.weight = Mat::Constant(1, 1, as_double(j["weight"], wp));
    } else {
        fail(join(path, "kind"), "unknown reaction term '" + kind +
                                     "' (allowed: constant, linear_x, linear_u, sin_u, "
                                     "linear_K, norm_u)");
    }
    return t;
}

TerminalTerm as_terminal(const json& j, const std::string& path, int d) {
    expect_object(j, path);
    check_keys(j, path, {"kind", "coef", "powers", "freq", "phase"});
    TerminalTerm t;
    const std::string kind =
        j.contains("kind") ? as_string(j["kind"], join(path, "kind")) : std::string("poly");
    if (j.contains("coef")) t.coef = as_double(j["coef"], join(path, "coef"));
    if (kind == "poly") {
        t.kind = TerminalTerm::Kind::poly;
        if (j.contains("freq") || j.contains("phase")) {
            fail(path, "poly terms take 'coef' and 'powers' only");
        }
        if (j.contains("powers")) {
            const auto& p = j["powers"];
            const std::string pp = join(path, "powers");
            if (!p.is_array() || static_cast<int>(p.size()) != d) {
                fail(pp, "expected a list of " + std::to_string(d) + " integers");
            }
            for (int k = 0; k < d; ++k) {
                const auto e = as_int(p[k], index(pp, k));
                if (e < 0 || e > 64) fail(index(pp, k), "expected an integer in [0, 64]");
                t.powers.push_back(static_cast<int>(e));
            }
        }
    } else if (kind == "sin" || kind == "cos") {
        t.kind = kind == "sin" ? TerminalTerm::Kind::sin : TerminalTerm::Kind::cos;
        if (j.contains("powers")) fail(path, kind + " terms take 'coef', 'freq' and 'phase'");
        if (!j.contains("freq")) fail(join(path, "freq"), "missing required field");
        const Vec f = as_vector(j["freq"], join(path, "freq"), d);
        t.freq.assign(f.data(), f.data() + d);
        if (j.contains("phase")) t.phase = as_double(j["phase"], join(path, "phase"));
    } else {
        fail(join(path, "kind"), "unknown terminal term '" + kind + "' (allowed: poly, sin, cos)");
    }
    return t;
}

DeclarativeProblem as_declarative(const json& j, const std::string& path) {
    check_keys(j, path, {"d", "d1", "T", "a", "A", "c", "C", "g", "u0", "budget", "box"});
    for (const char* key : {"d", "d1", "T", "u0"}) {
        if (!j.contains(key)) fail(join(path, key), "missing required field");
    }
    DeclarativeProblem p;
    p.d = static_cast<int>(as_int(j["d"], join(path, "d")));
    p.d1 = static_cast<int>(as_int(j["d1"], join(path, "d1")));
    if (p.d < 1 || p.d > 16) fail(join(path, "d"), "expected an integer in [1, 16]");
    if (p.d1 < 1 || p.d1 > 16) fail(join(path, "d1"), "expected an integer in [1, 16]");
    p.T = as_double(j["T"], join(path, "T"));
    if (!(p.T > 0.0)) fail(join(path, "T"), "expected a positive number");
    const int d = p.d, d1 = p.d1;

    p.a = j.contains("a") ? as_field(j["a"], join(path, "a"), FieldShape::vector, d, d, 1)
                          : zero_field(d, 1);
    p.A = j.contains("A") ? as_field(j["A"], join(path, "A"), FieldShape::matrix, d, d, d)
                          : zero_field(d, d);
    p.c = j.contains("c") ? as_field(j["c"], join(path, "c"), FieldShape::matrix, d, d1, d1)
                          : zero_field(d1, d1);
    p.C = j.contains("C")
              ? as_field(j["C"], join(path, "C"), FieldShape::coupling, d, d1, d * d1)
              : zero_field(d1, d * d1);
    if (j.contains("g")) {
        const auto& g = j["g"];
        const std::string gp = join(path, "g");
        if (!g.is_array()) fail(gp, "expected a list of reaction terms");
        for (std::size_t i = 0; i < g.size(); ++i) {
            p.g.push_back(as_reaction(g[i], index(gp, i), d, d1));
        }
    }
    const auto& u0 = j["u0"];
    const std::string up = join(path, "u0");
    if (!u0.is_array() || static_cast<int>(u0.size()) != d1) {
        fail(up, "expected one list of terms per component (" + std::to_string(d1) + ")");
    }
    for (int l = 0; l < d1; ++l) {
        const auto& terms = u0[l];
        if (!terms.is_array()) fail(index(up, l), "expected a list of terms");
        std::vector<TerminalTerm> list;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            list.push_back(as_terminal(terms[i], index(index(up, l), i), d));
        }
        p.u0.push_back(std::move(list));
    }
    if (j.contains("budget")) {
        const auto& b = j["budget"];
        const std::string bp = join(path, "budget");
        expect_object(b, bp);
        check_keys(b, bp, {"K1", "K2", "L1", "L2", "L3", "L", "mu", "C0"});
        const auto opt = [&](const char* key, double& slot) {
            if (b.contains(key)) slot = as_double(b[key], join(bp, key));
        };
        opt("K1", p.budget.K1);
        opt("K2", p.budget.K2);
        opt("L1", p.budget.L1);
        opt("L2", p.budget.L2);
        opt("L3", p.budget.L3);
        opt("L", p.budget.L);
        opt("mu", p.budget.mu);
        opt("C0", p.budget.C0);
    }
    if (j.contains("box")) {
        const auto& b = j["box"];
        const std::string bp = join(path, "box");
        expect_object(b, bp);
        check_keys(b, bp, {"x_radius", "u_radius", "k_radius"});
        const auto opt = [&](const char* key, double& slot) {
            if (!b.contains(key)) return;
            slot = as_double(b[key], join(bp, key));
            if (!(slot > 0.0)) fail(join(bp, key), "expected a positive number");
        };
        opt("x_radius", p.box.x_radius);
        opt("u_radius", p.box.u_radius);
        opt("k_radius", p.box.k_radius);
    }
    try {
        build_problem(p);
    } catch (const Error& e) {
        fail(path, e.what());
    }
    return p;
}

ProblemRef as_problem(const json& j, const std::string& path) {
    ProblemRef ref;
    if (j.is_string()) {
        ref.catalog_name = j.get<std::string>();
        const auto names = catalog_names();
        if (std::find(names.begin(), names.end(), ref.catalog_name) == names.end()) {
            std::string list;
            for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
            fail(path, "unknown catalog entry '" + ref.catalog_name + "' (available: " + list + ")");
        }
        return ref;
    }
    if (!j.is_object()) fail(path, "expected a catalog name or an inline problem object");
    ref.inline_problem = as_declarative(j, path);
    return ref;
}

const char* basis_name(BasisState b) {
    switch (b) {
    case BasisState::xi_only: return "xi_only";
    case BasisState::xi_and_gamma: return "xi_and_gamma";
    case BasisState::transported: return "transported";
    }
    return "";
}

void apply_solver(const json& j, const std::string& path, SolverConfig& cfg) {
    expect_object(j, path);
    check_keys(j, path,
               {"N", "M", "picard_max", "picard_tol", "beta", "basis_degree", "basis_state",
                "ridge"});
    if (j.contains("N")) cfg.N = static_cast<int>(as_int(j["N"], join(path, "N")));
    if (j.contains("M")) cfg.M = as_int(j["M"], join(path, "M"));
    if (j.contains("picard_max")) {
        cfg.picard_max = static_cast<int>(as_int(j["picard_max"], join(path, "picard_max")));
    }
    if (j.contains("picard_tol")) cfg.picard_tol = as_double(j["picard_tol"], join(path, "picard_tol"));
    if (j.contains("beta")) cfg.beta = as_double(j["beta"], join(path, "beta"));
    if (j.contains("basis_degree")) {
        cfg.basis_degree = static_cast<int>(as_int(j["basis_degree"], join(path, "basis_degree")));
    }
    if (j.contains("basis_state")) {
        const std::string b = as_string(j["basis_state"], join(path, "basis_state"));
        if (b == "xi_only") cfg.basis_state = BasisState::xi_only;
        else if (b == "xi_and_gamma") cfg.basis_state = BasisState::xi_and_gamma;
        else if (b == "transported") cfg.basis_state = BasisState::transported;
        else fail(join(path, "basis_state"), "expected one of xi_only, xi_and_gamma, transported");
    }
    if (j.contains("ridge")) cfg.ridge = as_double(j["ridge"], join(path, "ridge"));
    try {
        cfg.check();
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        throw ConfigError(path + what.substr(what.find('.')));
    }
}

// ---------------------------------------------------------------------------
// serialization

ojson write_matrix(const Mat& m) {
    ojson rows = ojson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ojson row = ojson::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

ojson write_vector(const Mat& v) {
    ojson out = ojson::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

ojson write_coupling(const Mat& blocks, int d) {
    ojson out = ojson::array();
    for (const auto& b : split_coupling(blocks, d)) out.push_back(write_matrix(b));
    return out;
}

ojson write_field(const AffineField& f, FieldShape shape, int d) {
    const auto value = [&](const Mat& m) {
        switch (shape) {
        case FieldShape::vector: return write_vector(m);
        case FieldShape::matrix: return write_matrix(m);
        case FieldShape::coupling: return write_coupling(m, d);
        }
        return ojson();
    };
    if (f.slopes.empty()) return value(f.constant);
    ojson out;
    out["constant"] = value(f.constant);
    ojson slopes = ojson::array();
    for (const auto& s : f.slopes) slopes.push_back(value(s));
    out["slopes"] = std::move(slopes);
    return out;
}

ojson write_problem(const ProblemRef& ref) {
    if (!ref.inline_problem) return ref.catalog_name;
    const auto& p = *ref.inline_problem;
    ojson out;
    out["d"] = p.d;
    out["d1"] = p.d1;
    out["T"] = p.T;
    out["a"] = write_field(p.a, FieldShape::vector, p.d);
    out["A"] = write_field(p.A, FieldShape::matrix, p.d);
    out["c"] = write_field(p.c, FieldShape::matrix, p.d);
    out["C"] = write_field(p.C, FieldShape::coupling, p.d);
    ojson g = ojson::array();
    for (const auto& t : p.g) {
        ojson term;
        switch (t.kind) {
        case ReactionTerm::Kind::constant: term["kind"] = "constant"; term["weight"] = write_vector(t.weight); break;
        case ReactionTerm::Kind::linear_x: term["kind"] = "linear_x"; term["weight"] = write_matrix(t.weight); break;
        case ReactionTerm::Kind::linear_u: term["kind"] = "linear_u"; term["weight"] = write_matrix(t.weight); break;
        case ReactionTerm::Kind::sin_u: term["kind"] = "sin_u"; term["weight"] = write_matrix(t.weight); break;
        case ReactionTerm::Kind::linear_K: term["kind"] = "linear_K"; term["weight"] = write_matrix(t.weight); break;
        case ReactionTerm::Kind::norm_u: term["kind"] = "norm_u"; term["weight"] = t.weight(0, 0); break;
        }
        g.push_back(std::move(term));
    }
    out["g"] = std::move(g);
    ojson u0 = ojson::array();
    for (const auto& comp : p.u0) {
        ojson terms = ojson::array();
        for (const auto& t : comp) {
            ojson term;
            if (t.kind == TerminalTerm::Kind::poly) {
                term["kind"] = "poly";
                term["coef"] = t.coef;
                if (!t.powers.empty()) term["powers"] = t.powers;
            } else {
                term["kind"] = t.kind == TerminalTerm::Kind::sin ? "sin" : "cos";
                term["coef"] = t.coef;
                term["freq"] = t.freq;
                term["phase"] = t.phase;
            }
            terms.push_back(std::move(term));
        }
        u0.push_back(std::move(terms));
    }
    out["u0"] = std::move(u0);
    ojson budget = ojson::object();
    const auto put = [&](const char* key, double v) {
        if (!std::isnan(v)) budget[key] = v;
    };
    put("K1", p.budget.K1);
    put("K2", p.budget.K2);
    put("L1", p.budget.L1);
    put("L2", p.budget.L2);
    put("L3", p.budget.L3);
    put("L", p.budget.L);
    put("mu", p.budget.mu);
    put("C0", p.budget.C0);
    out["budget"] = std::move(budget);
    out["box"] = {{"x_radius", p.box.x_radius}, {"u_radius", p.box.u_radius}, {"k_radius", p.box.k_radius}};
    return out;
}

ojson write_solver(const SolverConfig& c) {
    ojson out;
    out["N"] = c.N;
    out["M"] = c.M;
    out["picard_max"] = c.picard_max;
    out["picard_tol"] = c.picard_tol;
    if (c.beta) out["beta"] = *c.beta;
    out["basis_degree"] = c.basis_degree;
    if (c.basis_state) out["basis_state"] = basis_name(*c.basis_state);
    out["ridge"] = c.ridge;
    return out;
}

// Returns (d, d1, T) of a problem reference.
ProblemSpec spec_of(const ProblemRef& ref, const std::string& path) {
    try {
        return ref.build();
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

} // namespace

std::string to_string(JobKind kind) {
    switch (kind) {
    case JobKind::evaluate: return "evaluate";
    case JobKind::grid: return "grid";
    case JobKind::convergence: return "convergence";
    case JobKind::compare: return "compare";
    case JobKind::scalar_crosscheck: return "scalar-crosscheck";
    case JobKind::validate: return "validate";
    }
    return "";
}

ProblemSpec ProblemRef::build() const {
    if (inline_problem) return build_problem(*inline_problem, "inline");
    return catalog(catalog_name);
}

std::optional<ReferenceSolution> ProblemRef::oracle() const {
    if (inline_problem) return std::nullopt;
    return reference_solution(catalog_name);
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    expect_object(j, "");
    check_keys(j, "",
               {"job", "problem", "compare_with", "start", "grid", "solver", "refinements",
                "seeds", "directions", "samples", "output", "seed"});

    RunConfig c;
    if (!j.contains("job")) fail("job", "missing required field");
    const std::string job = as_string(j["job"], "job");
    bool known = false;
    for (JobKind k : {JobKind::evaluate, JobKind::grid, JobKind::convergence, JobKind::compare,
                      JobKind::scalar_crosscheck, JobKind::validate}) {
        if (job == to_string(k)) {
            c.job = k;
            known = true;
        }
    }
    if (!known) {
        fail("job", "unknown kind '" + job +
                        "' (allowed: evaluate, grid, convergence, compare, scalar-crosscheck, "
                        "validate)");
    }

    if (!j.contains("problem")) fail("problem", "missing required field");
    c.problem = as_problem(j["problem"], "problem");
    const ProblemSpec spec = spec_of(c.problem, "problem");
    if (j.contains("compare_with")) {
        c.compare_with = as_problem(j["compare_with"], "compare_with");
        const ProblemSpec other = spec_of(*c.compare_with, "compare_with");
        if (other.d != spec.d || other.d1 != spec.d1 || other.T != spec.T) {
            fail("compare_with", "must share (d, d1, T) with problem");
        }
    }

    if (j.contains("seed")) c.seed = as_uint(j["seed"], "seed");
    if (j.contains("solver")) apply_solver(j["solver"], "solver", c.solver);
    c.solver.seed = c.seed;

    if (j.contains("start")) {
        const auto& st = j["start"];
        expect_object(st, "start");
        check_keys(st, "start", {"s", "x"});
        if (st.contains("s")) c.s = as_double(st["s"], "start.s");
        if (st.contains("x")) {
            const Vec x = as_vector(st["x"], "start.x", spec.d);
            c.x.assign(x.data(), x.data() + x.size());
        }
    }
    if (!(c.s >= 0.0 && c.s < spec.T)) fail("start.s", "expected 0 <= s < T");

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        expect_object(g, "grid");
        check_keys(g, "grid", {"s", "x"});
        GridBlock block;
        block.s = g.contains("s") ? as_list(g["s"], "grid.s") : std::vector<double>{c.s};
        for (std::size_t i = 0; i < block.s.size(); ++i) {
            if (!(block.s[i] >= 0.0 && block.s[i] < spec.T)) {
                fail(index("grid.s", i), "expected 0 <= s < T");
            }
        }
        if (!g.contains("x")) fail("grid.x", "missing required field");
        const auto& gx = g["x"];
        if (!gx.is_array() || static_cast<int>(gx.size()) != spec.d) {
            fail("grid.x", "expected one list of values per state coordinate (" +
                               std::to_string(spec.d) + ")");
        }
        for (int k = 0; k < spec.d; ++k) block.x.push_back(as_list(gx[k], index("grid.x", k)));
        c.grid = std::move(block);
    }

    if (j.contains("refinements")) {
        const auto& r = j["refinements"];
        if (!r.is_array()) fail("refinements", "expected a list of solver blocks");
        for (std::size_t i = 0; i < r.size(); ++i) {
            SolverConfig cfg = c.solver;
            apply_solver(r[i], index("refinements", i), cfg);
            c.refinements.push_back(cfg);
        }
    }
    if (j.contains("seeds")) {
        c.seeds = static_cast<int>(as_int(j["seeds"], "seeds"));
        if (c.seeds < 1) fail("seeds", "expected an integer >= 1");
    }
    if (j.contains("directions")) {
        const auto& dirs = j["directions"];
        if (!dirs.is_array() || dirs.empty()) fail("directions", "expected a non-empty list of vectors");
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            const Vec h = as_vector(dirs[i], index("directions", i), spec.d1);
            c.directions.emplace_back(h.data(), h.data() + h.size());
        }
    }
    if (j.contains("samples")) {
        c.samples = static_cast<int>(as_int(j["samples"], "samples"));
        if (c.samples < 2) fail("samples", "expected an integer >= 2");
    }
    if (j.contains("output")) {
        c.output = as_string(j["output"], "output");
        if (c.output.empty()) fail("output", "expected a non-empty path");
    }

    switch (c.job) {
    case JobKind::grid:
        if (!c.grid) fail("grid", "grid jobs require a grid block");
        break;
    case JobKind::convergence:
        if (c.refinements.size() < 2) {
            fail("refinements", "convergence jobs require at least 2 solver refinements");
        }
        break;
    case JobKind::compare:
        if (!c.compare_with) fail("compare_with", "compare jobs require a second problem");
        break;
    default: break;
    }
    return c;
}

std::string to_json(const RunConfig& c) {
    ojson out;
    out["job"] = to_string(c.job);
    out["problem"] = write_problem(c.problem);
    if (c.compare_with) out["compare_with"] = write_problem(*c.compare_with);
    out["seed"] = c.seed;
    out["start"]["s"] = c.s;
    if (!c.x.empty()) out["start"]["x"] = c.x;
    if (c.grid) {
        out["grid"]["s"] = c.grid->s;
        out["grid"]["x"] = c.grid->x;
    }
    out["solver"] = write_solver(c.solver);
    if (!c.refinements.empty()) {
        ojson refs = ojson::array();
        for (const auto& r : c.refinements) refs.push_back(write_solver(r));
        out["refinements"] = std::move(refs);
    }
    out["seeds"] = c.seeds;
    if (!c.directions.empty()) out["directions"] = c.directions;
    out["samples"] = c.samples;
    out["output"] = c.output;
    return out.dump(2);
}

} // namespace fbsde
