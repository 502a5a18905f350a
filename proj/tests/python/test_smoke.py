import json
import math

import numpy as np
import pytest

import qnls

FREE = {
    "model": "free",
    "grid": {"dim": 1, "points": 128, "half_width": 20.0},
    "initial_data": {"family": "gaussian", "amplitude": 1.0, "width": 1.0},
    "solver": {"dt": 0.01, "T": 0.5, "checkpoint_stride": 10},
}


def free_gaussian(x, t, width=1.0):
    s = width**2 + 2j * t
    return np.sqrt(width**2 / s) * np.exp(-(x**2) / (2 * s))


def test_grid_and_norms():
    g = qnls.Grid(1, 64, math.pi)
    x = np.array(g.coordinates(0))
    wave = np.exp(3j * x)
    # ||e^{3ix}||_{L2}^2 = 2 pi and the H^1 weight is 1 + 9.
    assert qnls.l2_norm(g, wave) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
    assert qnls.sobolev_norm(g, wave, 1.0) == pytest.approx(math.sqrt(10 * 2 * math.pi), rel=1e-12)
    with pytest.raises(ValueError):
        qnls.l2_norm(g, wave[:10])


def test_run_matches_free_closed_form():
    times, fields = qnls.run(FREE)
    assert len(times) == len(fields) == 6
    g = qnls.Grid(1, 128, 20.0)
    x = np.array(g.coordinates(0))
    exact = free_gaussian(x, times[-1])
    err = np.linalg.norm(fields[-1] - exact) / np.linalg.norm(exact)
    assert err < 1e-8


def test_scenario_round_trip_and_errors():
    canon = qnls.canonical_scenario(FREE)
    assert qnls.canonical_scenario(canon) == canon
    assert qnls.scenario_hash(canon) == qnls.scenario_hash(json.dumps(FREE))
    bad = json.loads(json.dumps(FREE))
    bad["grid"]["pointz"] = 3
    with pytest.raises(qnls.ValidationError, match="grid.pointz"):
        qnls.canonical_scenario(bad)
    with pytest.raises(ValueError):
        qnls.canonical_scenario("{not json")


def test_commands(tmp_path):
    code, log = qnls.simulate(FREE, out=tmp_path / "run")
    assert code == 0
    summary = json.loads((tmp_path / "run" / "summary.json").read_text())
    assert summary["analytic_error_rel"] < 1e-10
    t, field = qnls.load_checkpoint(tmp_path / "run" / "checkpoints" / "cp_00005.qnls")
    assert t == pytest.approx(0.5)
    assert field.shape == (128,)

    code, text = qnls.report(tmp_path / "run")
    assert code == 0 and "nonlinear_amplification" in text

    code, _ = qnls.verify_lemmas([], out=tmp_path / "none")
    assert code == 0
    with pytest.raises(qnls.ValidationError):
        qnls.converge(FREE, out=tmp_path / "c", halvings=0)


def test_identity_suite_and_determinism():
    a = qnls.run_suite("identities", seed=5, count=5, points=128)
    b = qnls.run_suite("identities", seed=5, count=5, points=128)
    assert a == b
    assert all(r["passed"] for r in a)
    assert "identities" in qnls.suite_names()
    assert "toy-quadratic" in qnls.builtin_models()
