#pragma once

#include "fbsde/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fbsde {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,       ///< bad arguments or invalid config
    exit_io = 2,          ///< config or output file could not be read/written
    exit_solver = 3,      ///< solver, simulation or regression failure
    exit_violation = 4,   ///< compare job found ordering violations
};

/// One CSV line: a component of the estimate at one start point.
struct ResultRow {
    double s = 0.0;
    std::vector<double> x;
    int m = 1;  ///< 1-based component index
    double value = 0.0;
    double std_error = 0.0;
    int N = 0;
    std::int64_t M = 0;
    std::uint64_t seed = 0;
    std::optional<double> oracle;
    std::optional<double> abs_error;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// "s,x_1,..,x_d,m,u_m,stderr,N,M,seed" plus ",oracle,abs_error" when requested.
std::string csv_header(int d, bool with_oracle);

struct RunOutcome {
    int exit_code = exit_ok;
    std::string summary;            ///< one line, no trailing newline
    std::vector<std::string> warnings;
    std::string csv;                ///< full CSV document
};

/// Executes the job without touching the filesystem.
RunOutcome execute(const RunConfig& config);

/// Executes the job, writes the CSV to config.output and prints the summary
/// (and warnings) to `out`. Errors are reported on `err`; returns the exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

} // namespace fbsde
