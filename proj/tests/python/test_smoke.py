import json

import numpy as np
import pytest

import gclab


def test_eigen_system_example():
    values, vectors, gap = gclab.eigen_system(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert values == pytest.approx([3.0, 1.0])
    assert vectors[:, 0] == pytest.approx(np.array([1.0, 1.0]) / np.sqrt(2.0))
    assert gap == pytest.approx(2.0)


def test_closed_form_matches_numpy():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = rng.uniform(-2, 2, (2, 2))
        w = a + a.T
        values, _ = gclab.closed_form_2x2(w)
        assert values == pytest.approx(np.sort(np.linalg.eigvalsh(w))[::-1], abs=1e-12)


def test_tabulated_derivatives():
    d = gclab.eigen_derivatives(np.diag([3.0, 1.0]), 0)
    assert d["d_lambda"][0, 0] == 1.0
    assert d["d_tau"][1, 1, 0] == 0.5
    assert d["d2_tau"][0, 1, 0, 1, 0] == -0.25
    assert d["d2_tau"].shape == (2, 2, 2, 2, 2)


def test_formula_matches_oracle():
    w = np.array([[1.0, 0.3, -0.2], [0.3, -0.5, 0.4], [-0.2, 0.4, 2.0]])
    formula = gclab.eigen_derivatives(w, 1, symmetric_pair=True)
    oracle = gclab.perturbation_oracle(w, 1, 1e-5)
    assert np.max(np.abs(formula["d_tau"] - oracle["d_tau"])) < 1e-6
    assert np.max(np.abs(formula["d2_tau"] - oracle["d2_tau"])) < 1e-4


def test_errors_map_to_exceptions():
    with pytest.raises(gclab.InputError):
        gclab.eigen_system(np.array([[1.0, 2.0], [3.0, 4.0]]))
    with pytest.raises(gclab.DegenerateGapError):
        gclab.closed_form_2x2(np.eye(2))
    with pytest.raises(gclab.InputError):
        gclab.solve("paraboloid")


def test_solve_and_estimate():
    s = gclab.solve("cosh", 1.0, 32)
    assert s["converged"]
    assert s["u"].shape == (33, 33)
    assert np.max(np.abs(s["u"] - s["exact"])) < 1e-3
    r = gclab.estimate("cosh", 1.0, 32, s["u"])
    assert r["chain_holds"]
    assert r["c0"] == pytest.approx(128.0)
    assert r["u_tau_tau_origin"] <= r["bound_at_origin"]
    g = gclab.gradient_bound(1.0, s["u"], 1.0)
    assert g["holds"]


def test_estimate_overflow_raises():
    s = gclab.solve("aniso-quadratic", 1.0, 32)
    with pytest.raises(gclab.RangeError):
        gclab.estimate("aniso-quadratic", 1.0, 32, s["u"])


def test_run_command(tmp_path):
    config = json.dumps({"solve": {"manufactured": "radial-quadratic", "n_cells": 16}})
    code, log = gclab.run_command("solve", config, tmp_path)
    assert code == 0
    assert (tmp_path / "solution.json").exists()
    assert gclab.run_command("solve", "{", tmp_path)[0] == 2
