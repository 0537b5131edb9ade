#include "fbsde/bsde.hpp"
#include "fbsde/config.hpp"
#include "fbsde/forward.hpp"
#include "fbsde/parallel.hpp"
#include "fbsde/run.hpp"
#include "fbsde/scalarize.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <tuple>

namespace py = pybind11;
using namespace fbsde;

namespace {

struct Request {
    RunConfig config;
    ProblemSpec spec;
    Vec x;
};

Request load(const std::string& text) {
    Request r{parse_config(text), {}, {}};
    r.spec = r.config.problem.build();
    if (r.config.x.empty()) {
        r.x = Vec::Zero(r.spec.d);
    } else {
        r.x = Eigen::Map<const Vec>(r.config.x.data(), static_cast<Eigen::Index>(r.config.x.size()));
    }
    return r;
}

py::dict estimate_dict(const Estimate& e) {
    py::dict d;
    d["value"] = e.value;
    d["std_error"] = e.std_error;
    d["N"] = e.N;
    d["M"] = e.M;
    d["seed"] = e.seed;
    d["wall_time"] = e.wall_time;
    d["converged"] = e.converged;
    d["iterations"] = e.iterations;
    d["picard_residuals"] = e.picard_residuals;
    return d;
}

py::dict evaluate(const std::string& text) {
    const auto r = load(text);
    Estimate e;
    {
        py::gil_scoped_release release;
        e = evaluate_u(r.spec, r.config.s, r.x, r.config.solver);
    }
    return estimate_dict(e);
}

py::dict scalar(const std::string& text, const Vec& h) {
    const auto r = load(text);
    ScalarEstimate e;
    {
        py::gil_scoped_release release;
        e = solve_scalar(build_enlarged(r.spec, h), r.config.s, r.x, r.config.solver);
    }
    py::dict d;
    d["value"] = e.value;
    d["std_error"] = e.std_error;
    d["N"] = e.N;
    d["M"] = e.M;
    d["seed"] = e.seed;
    d["converged"] = e.converged;
    d["iterations"] = e.iterations;
    d["picard_residuals"] = e.picard_residuals;
    return d;
}

py::dict gamma_checks(const std::string& text, const std::vector<std::tuple<int, int, int>>& triples) {
    const auto r = load(text);
    double compose = 0.0, inverse = 0.0;
    {
        py::gil_scoped_release release;
        const auto paths = simulate_forward(r.spec, r.config.s, r.x, r.config.solver);
        for (const auto& [k1, k2, k3] : triples) {
            compose = std::max(compose, gamma_compose_check(r.spec, paths, k1, k2, k3));
        }
        inverse = gamma_inverse_check(paths);
    }
    py::dict d;
    d["compose"] = compose;
    d["inverse"] = inverse;
    return d;
}

py::list validate_problem(const std::string& text, int samples, std::uint64_t seed) {
    const auto r = load(text);
    const auto report = validate(r.spec, samples, seed);
    py::list out;
    for (const auto& e : report.entries) {
        py::dict d;
        d["name"] = e.name;
        d["observed"] = e.observed;
        d["declared"] = std::isnan(e.declared) ? py::object(py::none()) : py::float_(e.declared);
        d["flagged"] = e.flagged;
        out.append(d);
    }
    return out;
}

py::dict compare(const std::string& text) {
    const auto r = load(text);
    if (!r.config.compare_with) throw ConfigError("compare_with: required");
    const auto other = r.config.compare_with->build();
    ComparisonReport rep;
    {
        py::gil_scoped_release release;
        rep = comparison_harness(r.spec, other, r.config.s, r.x, r.config.solver, r.config.seeds);
    }
    py::list records;
    for (const auto& rec : rep.records) {
        py::dict d;
        d["seed"] = rec.seed;
        d["y1"] = rec.y1;
        d["y2"] = rec.y2;
        d["se1"] = rec.se1;
        d["se2"] = rec.se2;
        records.append(d);
    }
    py::dict d;
    d["records"] = records;
    d["violations"] = rep.violations;
    d["total_violations"] = rep.total_violations();
    d["strictly_above"] = rep.strictly_above;
    d["hypotheses_satisfied"] = rep.hypotheses.satisfied();
    d["exploratory"] = rep.exploratory;
    return d;
}

py::dict execute_job(const std::string& text) {
    const auto config = parse_config(text);
    RunOutcome o;
    {
        py::gil_scoped_release release;
        o = execute(config);
    }
    py::dict d;
    d["exit_code"] = o.exit_code;
    d["summary"] = o.summary;
    d["warnings"] = o.warnings;
    d["csv"] = o.csv;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Monte Carlo solver for quasilinear parabolic systems";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionError>(m, "DimensionError", base);
    py::register_exception<EvaluationError>(m, "EvaluationError", base);
    py::register_exception<LookupError>(m, "LookupError", base);
    py::register_exception<ConstructionError>(m, "ConstructionError", base);
    py::register_exception<SimulationError>(m, "SimulationError", base);
    py::register_exception<RegressionError>(m, "RegressionError", base);
    py::register_exception<ConfigError>(m, "ConfigError", base);

    m.def("catalog_names", &catalog_names);
    m.def("canonical_config", [](const std::string& text) { return to_json(parse_config(text)); },
          py::arg("text"));
    m.def("evaluate", &evaluate, py::arg("request"));
    m.def("solve_scalar", &scalar, py::arg("request"), py::arg("h"));
    m.def("gamma_checks", &gamma_checks, py::arg("request"), py::arg("triples"));
    m.def("validate", &validate_problem, py::arg("request"), py::arg("samples"), py::arg("seed"));
    m.def("compare", &compare, py::arg("request"));
    m.def("execute", &execute_job, py::arg("config"));
    m.def("thread_count", &thread_count);
    m.def("set_thread_count", &set_thread_count, py::arg("n"));
}
