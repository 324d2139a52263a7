import math
import pathlib

import pytest

import gcsim

CORPUS = pathlib.Path(__file__).resolve().parents[2] / "corpus"


def test_projection_round_trip():
    assert gcsim.project(0.0, 0.0) == (640.0, 360.0)
    px, py = gcsim.project(1.25, -3.5)
    x, y = gcsim.unproject(px, py)
    assert math.isclose(x, 1.25, abs_tol=1e-12)
    assert math.isclose(y, -3.5, abs_tol=1e-12)
    window = {"x_min": 0, "x_max": 10, "y_min": 0, "y_max": 10, "width": 1280, "height": 720}
    assert gcsim.project(0, 0, window) == (0.0, 720.0)


def test_compile_and_reference():
    program = gcsim.compile_plan(CORPUS / "triangle_bisector_label.json")
    assert len(program["groups"]) == 3
    scene = gcsim.reference(CORPUS / "triangle_bisector_label.json")
    assert any(o["variant"] == "text-label" for o in scene["objects"])


def test_validate_reports_use_before_create():
    plan = {
        "tasks": [
            {"function": "angle_bisector", "args": {"points": [[3, 0], [-1, 0], [1, 3]]}},
            {"function": "draw_polygon", "args": {"points": [[-1, 0], [3, 0], [1, 3]]}},
        ]
    }
    codes = {code for code, _, _ in gcsim.validate(plan)}
    assert codes == {"E_USE_BEFORE_CREATE"}
    assert gcsim.validate(CORPUS / "square_side_two.json") == []


def test_run_replay_score(tmp_path):
    path = gcsim.run(CORPUS / "nested_midpoints.json", output_dir=tmp_path)
    assert gcsim.replay(path)["ok"]
    report = gcsim.score(path, gt_path=path)
    for key in ("AA", "PA", "SSR", "TSR", "MPS", "OTC"):
        assert report[key] == pytest.approx(1.0)


def test_score_formulas():
    assert gcsim.middle_process_score(0.0, 0.5, 0.6, 0.8) == pytest.approx(0.24)
    assert gcsim.final_result_score(0.4472, 0.6, 0.3, 0.7) == pytest.approx(0.51416)
    assert gcsim.overall_score(0.24, 0.51416) == pytest.approx(0.37708)


def test_perturbation():
    report = gcsim.sensitivity(CORPUS / "nested_midpoints.json", 0)
    gains = {b["label"]: b["gain"] for b in report["downstream"]}
    assert gains["D"] == pytest.approx(0.25, abs=1e-6)
    cascade = gcsim.cascade(CORPUS / "nested_midpoints.json", 5.0, seeds=20)
    assert cascade["sources"]


def test_errors_carry_codes():
    with pytest.raises(gcsim.GcsimError) as info:
        gcsim.compile_plan('{"id":"x","plan":{"tasks":[{"function":"draw_blob","args":{}}]}}')
    assert info.value.code == "E_UNKNOWN_FUNCTION"
    with pytest.raises(gcsim.GcsimError):
        gcsim.run(CORPUS / "nested_midpoints.json", policy="random")
