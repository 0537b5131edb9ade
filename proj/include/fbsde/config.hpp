#pragma once

#include "fbsde/declarative.hpp"
#include "fbsde/solver_config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fbsde {

enum class JobKind { evaluate, grid, convergence, compare, scalar_crosscheck, validate };

std::string to_string(JobKind kind);

/// A catalog entry by name, or an inline declarative problem.
struct ProblemRef {
    std::string catalog_name;
    std::optional<DeclarativeProblem> inline_problem;

    ProblemSpec build() const;
    /// Closed-form solution, catalog entries only.
    std::optional<ReferenceSolution> oracle() const;

    bool operator==(const ProblemRef&) const = default;
};

/// Rectangular evaluation grid: every s in `s` times the Cartesian product of
/// the per-coordinate value lists in `x`.
struct GridBlock {
    std::vector<double> s;
    std::vector<std::vector<double>> x;

    bool operator==(const GridBlock&) const = default;
};

struct RunConfig {
    JobKind job = JobKind::evaluate;
    ProblemRef problem;
    std::optional<ProblemRef> compare_with;
    double s = 0.0;
    std::vector<double> x;  ///< empty means the origin
    std::optional<GridBlock> grid;
    SolverConfig solver;    ///< solver.seed mirrors `seed`
    std::vector<SolverConfig> refinements;
    int seeds = 20;                         ///< compare
    std::vector<std::vector<double>> directions;  ///< scalar-crosscheck; empty means e_1..e_d1
    int samples = 1000;                     ///< validate
    std::string output = "results.csv";
    std::uint64_t seed = 1;

    bool operator==(const RunConfig&) const = default;
};

/// Parses and validates a JSON run configuration. Errors name the offending
/// key path, e.g. "problem.g[0].weight: expected a 2 x 2 matrix".
RunConfig parse_config(const std::string& text);

/// Canonical JSON text; parse_config(to_json(c)) == c.
std::string to_json(const RunConfig& config);

} // namespace fbsde
