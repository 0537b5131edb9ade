import math
import os
import subprocess

import numpy as np
import pytest

import fbsde

SMALL = {"N": 10, "M": 2000}


def test_catalog_lists_all_entries():
    names = fbsde.catalog_names()
    for name in ["heat-1d", "rotation-coupling", "first-order-coupling", "manufactured-quasilinear"]:
        assert name in names


def test_heat_value_matches_closed_form():
    est = fbsde.evaluate("heat-1d", x=[0.0], solver={"N": 20, "M": 20000}, seed=3)
    assert est["value"].shape == (1,)
    assert abs(est["value"][0] - 1.0) <= 3 * est["std_error"][0] + 0.02
    assert est["M"] == 20000 and est["seed"] == 3


def test_scalar_pairs_with_vector_solution():
    x = [0.3]
    u = fbsde.evaluate("rotation-coupling", x=x, solver=SMALL, seed=4)
    h = np.array([0.6, -1.2])
    y = fbsde.solve_scalar("rotation-coupling", h, x=x, solver=SMALL, seed=4)
    combined = math.sqrt(y["std_error"] ** 2 + float(np.sum(h**2 * u["std_error"] ** 2)))
    assert abs(y["value"] - h @ u["value"]) <= 3 * combined


def test_gamma_checks_are_exact_to_rounding():
    res = fbsde.gamma_checks("rotation-coupling", [(0, 5, 10), (2, 3, 9)], solver={"N": 10, "M": 100})
    assert res["compose"] <= 1e-12
    assert res["inverse"] <= 1e-10


def test_validate_reports_named_quantities():
    entries = fbsde.validate("manufactured-quasilinear", samples=200, seed=2)
    names = {e["name"] for e in entries}
    assert {"L", "K1", "mu"} <= names
    assert not any(e["flagged"] for e in entries)


def test_inline_problem_and_compare():
    base = {
        "d": 1, "d1": 1, "T": 1, "A": [[1]],
        "u0": [[{"kind": "cos", "freq": [1]}]],
    }
    upper = dict(base, u0=[[{"kind": "cos", "freq": [1]}, {"coef": 0.5}]])
    rep = fbsde.compare(base, upper, x=[0.1], solver={"N": 5, "M": 1000}, seeds=3)
    assert rep["total_violations"] == 0
    assert rep["strictly_above"] == [True]
    assert len(rep["records"]) == 3


def test_config_errors_name_the_key():
    with pytest.raises(fbsde.ConfigError, match="solver.N"):
        fbsde.canonical_config({"job": "evaluate", "problem": "heat-1d", "solver": {"N": 0}})
    with pytest.raises(fbsde.ConfigError, match="available: heat-1d"):
        fbsde.evaluate("no-such-problem")
    assert issubclass(fbsde.RegressionError, fbsde.Error)


def test_execute_is_thread_count_independent():
    config = {"job": "evaluate", "problem": "first-order-coupling",
              "start": {"x": [0.2]}, "solver": SMALL, "seed": 9}
    previous = fbsde.thread_count()
    try:
        fbsde.set_thread_count(1)
        one = fbsde.execute(config)
        fbsde.set_thread_count(3)
        three = fbsde.execute(config)
    finally:
        fbsde.set_thread_count(previous)
    assert one["exit_code"] == 0
    assert one["csv"] == three["csv"]
    assert one["csv"].startswith("s,x_1,m,u_m,stderr,N,M,seed")


@pytest.mark.skipif("FBSDE_CLI" not in os.environ, reason="command-line binary not available")
def test_cli_matches_in_process_run(tmp_path):
    config = tmp_path / "job.json"
    config.write_text('{"job": "evaluate", "problem": "heat-1d", "solver": {"N": 10, "M": 1000}, "seed": 5}')
    out = tmp_path / "out.csv"
    proc = subprocess.run([os.environ["FBSDE_CLI"], "solve", str(config), "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    expected = fbsde.execute(config.read_text())["csv"]
    assert out.read_text() == expected
