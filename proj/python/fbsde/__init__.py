"""Monte Carlo solver for quasilinear parabolic systems.

Problems are catalog names (see ``catalog_names()``) or dictionaries in the
inline problem format of the JSON run configuration. Solver settings are
dictionaries with the keys of the ``solver`` block.
"""

import json

import numpy as np

from ._core import (
    ConfigError,
    ConstructionError,
    DimensionError,
    Error,
    EvaluationError,
    LookupError,
    RegressionError,
    SimulationError,
    catalog_names,
    set_thread_count,
    thread_count,
)
from . import _core

__all__ = [
    "ConfigError",
    "ConstructionError",
    "DimensionError",
    "Error",
    "EvaluationError",
    "LookupError",
    "RegressionError",
    "SimulationError",
    "canonical_config",
    "catalog_names",
    "compare",
    "evaluate",
    "execute",
    "gamma_checks",
    "set_thread_count",
    "solve_scalar",
    "thread_count",
    "validate",
]


def _request(job, problem, s=0.0, x=None, solver=None, seed=1, **extra):
    config = {"job": job, "problem": problem, "start": {"s": float(s)}, "seed": int(seed)}
    if x is not None:
        config["start"]["x"] = [float(v) for v in np.atleast_1d(x)]
    if solver:
        config["solver"] = dict(solver)
    config.update({k: v for k, v in extra.items() if v is not None})
    return json.dumps(config)


def canonical_config(config):
    """Parse and validate a run configuration, returning it in canonical form."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_core.canonical_config(text))


def evaluate(problem, s=0.0, x=None, solver=None, seed=1):
    """Estimate u(s, x) with standard errors and Picard diagnostics."""
    return _core.evaluate(_request("evaluate", problem, s, x, solver, seed))


def solve_scalar(problem, h, s=0.0, x=None, solver=None, seed=1):
    """Estimate <h, u(s, x)> through the enlarged scalar equation."""
    h = np.asarray(h, dtype=float).reshape(-1)
    return _core.solve_scalar(_request("evaluate", problem, s, x, solver, seed), h)


def gamma_checks(problem, triples, s=0.0, x=None, solver=None, seed=1):
    """Largest composition and inverse defects of the simulated Gamma factors."""
    triples = [tuple(int(k) for k in t) for t in triples]
    return _core.gamma_checks(_request("evaluate", problem, s, x, solver, seed), triples)


def validate(problem, samples=1000, seed=1):
    """Empirical growth and Lipschitz ratios against the declared budget."""
    return _core.validate(_request("evaluate", problem), int(samples), int(seed))


def compare(problem, compare_with, s=0.0, x=None, solver=None, seed=1, seeds=20):
    """Run the comparison harness for an ordered pair of problems."""
    return _core.compare(
        _request("compare", problem, s, x, solver, seed, compare_with=compare_with, seeds=int(seeds))
    )


def execute(config):
    """Run a full job configuration in memory; returns exit code, summary and CSV."""
    text = config if isinstance(config, str) else json.dumps(config)
    return _core.execute(text)
