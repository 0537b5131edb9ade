#include "fbsde/run.hpp"

#include "fbsde/bsde.hpp"
#include "fbsde/scalarize.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fbsde {
namespace {

Vec start_point(const RunConfig& c, const ProblemSpec& spec) {
    if (c.x.empty()) return Vec::Zero(spec.d);
    return Eigen::Map<const Vec>(c.x.data(), static_cast<Eigen::Index>(c.x.size()));
}

std::vector<double> as_std(const CVecRef& v) { return {v.data(), v.data() + v.size()}; }

std::string row_text(const ResultRow& r, bool with_oracle) {
    std::string line = format_double(r.s);
    for (double xi : r.x) line += "," + format_double(xi);
    line += "," + std::to_string(r.m) + "," + format_double(r.value) + "," +
            format_double(r.std_error) + "," + std::to_string(r.N) + "," + std::to_string(r.M) +
            "," + std::to_string(r.seed);
    if (with_oracle) {
        line += "," + (r.oracle ? format_double(*r.oracle) : std::string()) + "," +
                (r.abs_error ? format_double(*r.abs_error) : std::string());
    }
    return line + "\n";
}

std::string rows_csv(const std::vector<ResultRow>& rows, int d, bool with_oracle) {
    std::string out = csv_header(d, with_oracle) + "\n";
    for (const auto& r : rows) out += row_text(r, with_oracle);
    return out;
}

void estimate_rows(std::vector<ResultRow>& rows, double s, const Vec& x, const Estimate& est,
                   const std::optional<ReferenceSolution>& oracle) {
    const std::optional<Vec> exact = oracle ? std::optional<Vec>((*oracle)(s, x)) : std::nullopt;
    for (Eigen::Index m = 0; m < est.value.size(); ++m) {
        ResultRow r;
        r.s = s;
        r.x = as_std(x);
        r.m = static_cast<int>(m) + 1;
        r.value = est.value[m];
        r.std_error = est.std_error[m];
        r.N = est.N;
        r.M = est.M;
        r.seed = est.seed;
        if (exact) {
            r.oracle = (*exact)[m];
            r.abs_error = std::abs(est.value[m] - (*exact)[m]);
        }
        rows.push_back(std::move(r));
    }
}

std::string value_text(const Estimate& est) {
    std::ostringstream os;
    os << "(";
    for (Eigen::Index m = 0; m < est.value.size(); ++m) {
        os << (m ? ", " : "") << format_double(est.value[m]) << " +- "
           << format_double(est.std_error[m]);
    }
    os << ")";
    return os.str();
}

void note_convergence(RunOutcome& out, const Estimate& est, const std::string& where) {
    if (!est.converged) {
        out.warnings.push_back("warning: Picard iteration did not converge at " + where +
                               " after " + std::to_string(est.iterations) + " iterations");
    }
}

std::string point_text(double s, const Vec& x) {
    std::string t = "s=" + format_double(s) + ", x=(";
    for (Eigen::Index i = 0; i < x.size(); ++i) t += (i ? "," : "") + format_double(x[i]);
    return t + ")";
}

// Cartesian product of the grid axes, first coordinate varying slowest.
std::vector<Vec> grid_points(const GridBlock& g) {
    std::vector<Vec> points{Vec(0)};
    for (const auto& axis : g.x) {
        std::vector<Vec> next;
        for (const auto& p : points) {
            for (double v : axis) {
                Vec q(p.size() + 1);
                q << p, v;
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }
    return points;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_header(int d, bool with_oracle) {
    std::string h = "s";
    for (int i = 1; i <= d; ++i) h += ",x_" + std::to_string(i);
    h += ",m,u_m,stderr,N,M,seed";
    if (with_oracle) h += ",oracle,abs_error";
    return h;
}

RunOutcome execute(const RunConfig& c) {
    const ProblemSpec spec = c.problem.build();
    const auto oracle = c.problem.oracle();
    const Vec x = start_point(c, spec);
    SolverConfig solver = c.solver;
    solver.seed = c.seed;
    RunOutcome out;
    std::vector<ResultRow> rows;

    switch (c.job) {
    case JobKind::evaluate: {
        const Estimate est = evaluate_u(spec, c.s, x, solver);
        estimate_rows(rows, c.s, x, est, oracle);
        note_convergence(out, est, point_text(c.s, x));
        out.summary = "u(" + point_text(c.s, x) + ") = " + value_text(est);
        out.csv = rows_csv(rows, spec.d, oracle.has_value());
        break;
    }
    case JobKind::grid: {
        int points = 0;
        for (double s : c.grid->s) {
            for (const Vec& p : grid_points(*c.grid)) {
                const Estimate est = evaluate_u(spec, s, p, solver);
                estimate_rows(rows, s, p, est, oracle);
                note_convergence(out, est, point_text(s, p));
                ++points;
            }
        }
        double worst = 0.0;
        for (const auto& r : rows) {
            if (r.abs_error) worst = std::max(worst, *r.abs_error);
        }
        out.summary = "grid: " + std::to_string(points) + " points evaluated";
        if (oracle) out.summary += ", max abs error " + format_double(worst);
        out.csv = rows_csv(rows, spec.d, oracle.has_value());
        break;
    }
    case JobKind::convergence: {
        std::vector<SolverConfig> configs = c.refinements;
        for (auto& cfg : configs) cfg.seed = c.seed;
        const std::optional<Vec> exact =
            oracle ? std::optional<Vec>((*oracle)(c.s, x)) : std::nullopt;
        const auto table = convergence_study(spec, c.s, x, configs, exact);
        std::string errors;
        for (const auto& row : table) {
            Estimate est;
            est.value = row.value;
            est.std_error = row.std_error;
            est.N = row.N;
            est.M = row.M;
            est.seed = c.seed;
            estimate_rows(rows, c.s, x, est, oracle);
            if (row.error) errors += (errors.empty() ? "" : ", ") + format_double(*row.error);
        }
        out.summary = "convergence: " + std::to_string(table.size()) + " refinements";
        if (!errors.empty()) out.summary += ", max abs errors " + errors;
        out.csv = rows_csv(rows, spec.d, oracle.has_value());
        break;
    }
    case JobKind::compare: {
        const ProblemSpec other = c.compare_with->build();
        const auto report = comparison_harness(spec, other, c.s, x, solver, c.seeds);
        for (const auto& rec : report.records) {
            for (Eigen::Index m = 0; m < rec.y1.size(); ++m) {
                ResultRow r;
                r.s = c.s;
                r.x = as_std(x);
                r.m = static_cast<int>(m) + 1;
                r.value = rec.y2[m] - rec.y1[m];
                r.std_error = rec.se1[m] + rec.se2[m];
                r.N = solver.N;
                r.M = solver.M;
                r.seed = rec.seed;
                rows.push_back(std::move(r));
            }
        }
        const int violations = report.total_violations();
        out.summary = std::to_string(violations) + " violations / " +
                      std::to_string(report.records.size()) + " seeds";
        if (report.exploratory) {
            out.warnings.push_back("warning: ordering hypotheses not satisfied (pass rate " +
                                   format_double(report.hypotheses.pass_rate()) +
                                   "); report is exploratory");
            out.summary += " (exploratory)";
        } else if (violations > 0) {
            out.exit_code = exit_violation;
        }
        out.csv = rows_csv(rows, spec.d, false);
        break;
    }
    case JobKind::scalar_crosscheck: {
        std::vector<Vec> directions;
        for (const auto& h : c.directions) {
            directions.emplace_back(Eigen::Map<const Vec>(h.data(), static_cast<Eigen::Index>(h.size())));
        }
        if (directions.empty()) {
            for (int l = 0; l < spec.d1; ++l) directions.push_back(Vec::Unit(spec.d1, l));
        }
        const Estimate u = evaluate_u(spec, c.s, x, solver);
        note_convergence(out, u, point_text(c.s, x));
        int within = 0;
        for (std::size_t i = 0; i < directions.size(); ++i) {
            const Vec& h = directions[i];
            const auto Y = solve_scalar(build_enlarged(spec, h), c.s, x, solver);
            const double paired = h.dot(u.value);
            const double combined =
                std::sqrt(Y.std_error * Y.std_error + h.cwiseAbs2().dot(u.std_error.cwiseAbs2()));
            ResultRow r;
            r.s = c.s;
            r.x = as_std(x);
            r.m = static_cast<int>(i) + 1;
            r.value = Y.value;
            r.std_error = Y.std_error;
            r.N = solver.N;
            r.M = solver.M;
            r.seed = c.seed;
            r.oracle = paired;
            r.abs_error = std::abs(Y.value - paired);
            if (*r.abs_error <= 3.0 * combined) ++within;
            rows.push_back(std::move(r));
        }
        out.summary = "scalar-crosscheck: " + std::to_string(within) + " / " +
                      std::to_string(directions.size()) +
                      " directions within 3 combined standard errors";
        out.csv = rows_csv(rows, spec.d, true);
        break;
    }
    case JobKind::validate: {
        const auto report = validate(spec, c.samples, c.seed);
        std::string csv = "quantity,observed,declared,flagged\n";
        int flagged = 0;
        for (const auto& e : report.entries) {
            csv += e.name + "," + format_double(e.observed) + "," +
                   (std::isnan(e.declared) ? std::string() : format_double(e.declared)) + "," +
                   (e.flagged ? "1" : "0") + "\n";
            if (e.flagged) ++flagged;
        }
        out.summary = "validate: " + std::to_string(flagged) + " flagged of " +
                      std::to_string(report.entries.size()) + " quantities";
        out.csv = std::move(csv);
        break;
    }
    }
    return out;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    RunOutcome outcome;
    try {
        outcome = execute(config);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const LookupError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_solver;
    }
    {
        std::ofstream file(config.output, std::ios::binary);
        file << outcome.csv;
        file.close();
        if (!file) {
            err << "error: cannot write " << config.output << "\n";
            return exit_io;
        }
    }
    for (const auto& w : outcome.warnings) out << w << "\n";
    out << outcome.summary << "\n";
    return outcome.exit_code;
}

} // namespace fbsde
