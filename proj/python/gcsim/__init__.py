"""Python bindings for the gcsim geometry-construction simulator."""

import json
import os

from . import _core
from ._core import GcsimError, final_result_score, middle_process_score, overall_score

__all__ = [
    "GcsimError",
    "cascade",
    "compile_plan",
    "final_result_score",
    "middle_process_score",
    "overall_score",
    "project",
    "reference",
    "replay",
    "run",
    "score",
    "sensitivity",
    "unproject",
    "validate",
]


def _text(problem):
    """Problem given as a dict, a JSON string or a path to a JSON file."""
    if isinstance(problem, dict):
        return json.dumps(problem)
    problem = os.fspath(problem)
    if not problem.lstrip().startswith(("{", "[")) and os.path.exists(problem):
        with open(problem, encoding="utf-8") as f:
            return f.read()
    return problem


def _viewport(viewport):
    return json.dumps(viewport) if viewport else ""


def project(x, y, viewport=None):
    return _core.project(x, y, _viewport(viewport))


def unproject(px, py, viewport=None):
    return _core.unproject(px, py, _viewport(viewport))


def validate(plan):
    """List of (code, task_index, message); empty when the plan is valid."""
    return _core.validate(_text(plan))


def compile_plan(problem):
    return json.loads(_core.compile(_text(problem)))


def reference(problem):
    return json.loads(_core.reference(_text(problem)))


def run(problem, policy="oracle", output_dir=".", step_budget=0):
    """Runs a policy and returns the path of the recorded trajectory."""
    return _core.run(_text(problem), policy, os.fspath(output_dir), step_budget)


def replay(path):
    ok, first_mismatch, problems = _core.replay(os.fspath(path))
    return {"ok": ok, "first_mismatch": first_mismatch, "problems": problems}


def score(path, reference_path=None, gt_path=None):
    return json.loads(_core.score(os.fspath(path), os.fspath(reference_path or ""), os.fspath(gt_path or "")))


def sensitivity(problem, task, h=1e-4):
    return json.loads(_core.sensitivity(_text(problem), task, h))


def cascade(problem, sigma_px, seeds=100, seed=1):
    return json.loads(_core.cascade(_text(problem), sigma_px, seeds, seed))
