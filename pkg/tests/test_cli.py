"""End-to-end tests of the command-line harness."""

import json
import os

import pytest

from jumpfree.cli import main


def run(args, tmp_path, name):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, out


def test_balls_command(tmp_path):
    code, out = run(["balls"], tmp_path, "balls")
    assert code == 0
    assert (out / "report.json").exists()
    assert (out / "events.csv").exists()
    assert (out / "balls.svg").exists()
    assert not (out / "FAILED").exists()
    report = json.loads((out / "report.json").read_text())
    assert report["provenance"]["command"] == "balls"


def test_approx2d_command_and_artifacts(tmp_path):
    code, out = run(["approx2d"], tmp_path, "a2d")
    assert code == 0
    assert (out / "w_values.csv").exists()
    assert (out / "omega.json").exists()
    assert (out / "overlay.svg").exists()


def test_validation_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "kind": "crack2d",
                               "params": {"bogus": 1}}))
    code, out = run(["approx2d", "--scenario", str(bad)], tmp_path, "bad")
    assert code == 2
    assert (out / "FAILED").exists()


def test_budget_violation_exit_code(tmp_path):
    code, out = run(["approx2d", "--T", "9"], tmp_path, "t9")
    assert code == 1
    assert (out / "FAILED").exists()


def test_reports_byte_identical_across_runs_and_threads(tmp_path):
    _, out1 = run(["approx2d"], tmp_path, "r1")
    os.environ["JUMPFREE_THREADS"] = "8"
    try:
        _, out2 = run(["approx2d"], tmp_path, "r2")
    finally:
        del os.environ["JUMPFREE_THREADS"]
    b1 = (out1 / "report.json").read_bytes()
    b2 = (out2 / "report.json").read_bytes()
    assert b1 == b2


def test_env_var_override(tmp_path):
    os.environ["JUMPFREE_T"] = "1.25"
    try:
        code, out = run(["approx2d"], tmp_path, "envT")
    finally:
        del os.environ["JUMPFREE_T"]
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["T"] == 1.25


def test_flag_beats_env_var(tmp_path):
    os.environ["JUMPFREE_T"] = "2.0"
    try:
        code, out = run(["approx2d", "--T", "0.5"], tmp_path, "flagT")
    finally:
        del os.environ["JUMPFREE_T"]
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["T"] == 0.5


@pytest.mark.slow
def test_remaining_commands(tmp_path):
    for cmd in ("approx3d", "ms-gamma", "counterexample-sweep"):
        code, out = run([cmd], tmp_path, cmd)
        assert code == 0, cmd
        assert (out / "report.json").exists()
