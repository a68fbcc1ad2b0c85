import json
import math
import pathlib

import pytest

import mzdual

DATA = pathlib.Path(__file__).resolve().parents[2] / "data"
AM = [[[[1, 0], [0, 0]]], [[[0, 0], [0, 1]]]]


def test_matrix_game():
    value, row, col = mzdual.solve_matrix_game([[1, -1], [-1, 1]])
    assert value == 0.0
    assert row == pytest.approx([0.5, 0.5])
    assert col == pytest.approx([0.5, 0.5])
    # a=3, b=0, c=1, d=2: value (ad - bc) / (a + d - b - c) = 1.5
    assert mzdual.solve_matrix_game([[3, 0], [1, 2]])[0] == pytest.approx(1.5, abs=1e-12)


def test_nonrevealing_and_mz():
    for p in (0.0, 0.3, 0.5, 1.0):
        assert mzdual.nonrevealing_value(AM, [p, 1 - p]) == pytest.approx(p * (1 - p), abs=1e-12)
    sol = mzdual.solve_mz(AM, grid_m=20)
    assert len(sol["points"]) == 21
    for pt, w in zip(sol["points"], sol["w"]):
        assert w == pytest.approx(pt[0] * (1 - pt[0]), abs=1e-9)
    assert sol["gap"] <= 1e-6
    assert all(c["passed"] for c in sol["verification"].values())


def test_cav_of_a_convex_table():
    pts = mzdual.simplex_grid(2, 4)
    env = mzdual.cav(2, 4, [p[0] ** 2 for p in pts])
    assert env == pytest.approx([p[0] for p in pts], abs=1e-12)


def test_value_sequence():
    v = mzdual.value_sequence(AM, [0.5, 0.5], 3)
    assert v[0] == pytest.approx(0.5, abs=1e-8)
    assert v[0] >= v[1] >= v[2] >= 0.25 - 1e-8


def test_embedding_matches_closed_form():
    sol = mzdual.solve_embedding(AM, dt=0.05, dx=0.25, belief_m=10)
    for pt, v in zip(sol["points"], sol["v"]):
        assert abs(v - pt[0] * (1 - pt[0])) <= 5e-2
    assert all(c["passed"] for c in sol["verification"].values())


def test_parse_errors_are_collected():
    ok, errors = mzdual.parse_spec(json.dumps(
        {"types_l": ["x", "y"], "payoffs": {"0|x": [[1]], "0|y": [[0]]}, "belief": [0.5, 0.6]}
    ))
    assert not ok
    assert errors == ["belief: entries sum to 1.1, expected 1 within 1e-9"]
    ok, errors = mzdual.parse_spec((DATA / "aumann_maschler.json").read_text())
    assert ok and errors == []


def test_exceptions():
    with pytest.raises(mzdual.ValidationError):
        mzdual.nonrevealing_value(AM, [0.5, 0.6])
    assert issubclass(mzdual.IsaacsViolation, mzdual.HypothesisError)
    assert issubclass(mzdual.ValidationError, mzdual.Error)


def test_run_cli(tmp_path):
    code, report = mzdual.run("xcheck", DATA / "aumann_maschler.json", tmp_path)
    assert code == mzdual.EXIT_OK
    assert report["outputs"]["mz_hj_gap"] <= 5e-2
    assert (tmp_path / "xcheck.csv").exists()
    assert json.loads((tmp_path / "report.json").read_text())["status"] == "ok"

    bad = tmp_path / "bad.json"
    bad.write_text('{"payoffs": {"0|0": [[1]]}, "belief": [0.5, 0.6]}')
    code, report = mzdual.run("mz", bad, tmp_path / "bad")
    assert code == mzdual.EXIT_VALIDATION
    assert report["error"]["kind"] == "ValidationError"
    assert math.isfinite(report["timings"]["total_s"])
