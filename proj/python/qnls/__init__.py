"""Python access to the qnls spectral solver, diagnostics and lemma suites.

Scenarios may be passed as dicts or JSON text; arrays are complex128 with the
grid's shape.
"""

import json

from . import _qnls
from ._qnls import (
    Grid,
    NumericalError,
    ValidationError,
    builtin_models,
    dealias,
    encode_checkpoint,
    l2_norm,
    load_checkpoint,
    sobolev_norm,
    suite_names,
)

__all__ = [
    "Grid",
    "NumericalError",
    "ValidationError",
    "builtin_models",
    "canonical_scenario",
    "converge",
    "dealias",
    "diff_run",
    "encode_checkpoint",
    "l2_norm",
    "load_checkpoint",
    "report",
    "run",
    "run_suite",
    "scenario_hash",
    "simulate",
    "sobolev_norm",
    "suite_names",
    "verify_lemmas",
]


def _text(scenario):
    return scenario if isinstance(scenario, str) else json.dumps(scenario)


def canonical_scenario(scenario):
    return json.loads(_qnls.canonical_scenario(_text(scenario)))


def scenario_hash(scenario):
    return _qnls.scenario_hash(_text(scenario))


def run(scenario):
    """Solve in memory. Returns (times, checkpoints)."""
    return _qnls.run_scenario(_text(scenario))


def run_suite(name, seed=1, count=100, points=128):
    return [json.loads(r) for r in _qnls.run_suite(name, seed, count, points)]


# The command wrappers return (exit_code, log_text), matching the CLI.
def simulate(scenario, out="", seed=None, tolerance_profile="default"):
    return _qnls.simulate(_text(scenario), str(out), seed, tolerance_profile)


def converge(scenario, out="", halvings=3, distance_index=3.0):
    return _qnls.converge(_text(scenario), str(out), halvings, distance_index)


def verify_lemmas(suites=(), out="", count=100, points=128, seed=None):
    return _qnls.verify_lemmas(list(suites), str(out), count, points, seed)


def report(run_dir):
    return _qnls.report(str(run_dir))


def diff_run(scenario, out="", perturbation=1e-6):
    return _qnls.diff_run(_text(scenario), str(out), perturbation)
