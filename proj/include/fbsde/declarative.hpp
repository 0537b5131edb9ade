#pragma once

#include "fbsde/problem.hpp"

#include <string>
#include <vector>

namespace fbsde {

/// value(x) = constant + sum_j x_j * slopes[j]. `slopes` is empty (constant
/// field) or holds one matrix per state coordinate, each shaped like constant.
struct AffineField {
    Mat constant;
    std::vector<Mat> slopes;

    bool is_zero() const;
    bool operator==(const AffineField&) const = default;
};

/// Whitelisted reaction terms, summed:
///   constant  g += v                          (v: d1)
///   linear_x  g += P x                        (P: d1 x d)
///   linear_u  g += G u                        (G: d1 x d1)
///   sin_u     g_l += sum_m G_lm sin(u_m)      (G: d1 x d1)
///   linear_K  g_l += sum_k W_lk K_lk          (W: d1 x d)
///   norm_u    g += w |u| u                    (w: scalar in weight(0,0))
struct ReactionTerm {
    enum class Kind { constant, linear_x, linear_u, sin_u, linear_K, norm_u };
    Kind kind = Kind::constant;
    Mat weight;

    bool operator==(const ReactionTerm&) const = default;
};

/// One summand of a terminal component:
///   poly  coef * prod_j x_j^powers[j]
///   sin   coef * sin(<freq, x> + phase)
///   cos   coef * cos(<freq, x> + phase)
struct TerminalTerm {
    enum class Kind { poly, sin, cos };
    Kind kind = Kind::poly;
    double coef = 1.0;
    std::vector<int> powers;
    std::vector<double> freq;
    double phase = 0.0;

    bool operator==(const TerminalTerm&) const = default;
};

/// Problem expressible in the run-config grammar.
struct DeclarativeProblem {
    int d = 1;
    int d1 = 1;
    double T = 1.0;
    AffineField a;  ///< d x 1
    AffineField A;  ///< d x d
    AffineField c;  ///< d1 x d1
    AffineField C;  ///< d1 x (d*d1), block layout
    std::vector<ReactionTerm> g;
    std::vector<std::vector<TerminalTerm>> u0;  ///< one list per component
    LipschitzBudget budget;
    BudgetBox box;

    bool operator==(const DeclarativeProblem& o) const;
};

/// Zero field of the given shape.
AffineField zero_field(int rows, int cols);
AffineField constant_field(Mat value);

/// Validates shapes and assembles the callbacks.
ProblemSpec build_problem(const DeclarativeProblem& decl, std::string name = "inline");

/// Declarative form of a catalog entry; throws LookupError for entries that are
/// not expressible (manufactured-quasilinear).
DeclarativeProblem declarative_catalog(const std::string& name);

} // namespace fbsde
