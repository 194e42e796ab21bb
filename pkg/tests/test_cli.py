import csv
import json
from pathlib import Path

import pytest

from confine_lab import cli


def write_profile(tmp_path, body: str, name="profile.toml") -> str:
    path = tmp_path / name
    path.write_text(body)
    return str(path)


BALL_15 = """
[domain]
kind = "ball"
radius = 1.0
dim = 2

[[component]]
beta = 1.5
gamma = 0.0
nu0 = 0.25
"""

BALL_G1 = """
[domain]
kind = "ball"
radius = 1.0
dim = 2

[[component]]
beta = 0.0
gamma = 1.0
nu0 = 0.25
"""

HALF_STRIP = """
[domain]
kind = "half_strip"
width = 1.0
dim = 2
"""

BAD_WEIGHT = """
[domain]
kind = "ball"
radius = 1.0
dim = 2

[[component]]
beta = 1.0
gamma = 0.0
rho_minus = -1.0
rho_plus = -1.0
"""


def run(argv):
    return cli.main(argv)


def test_classify_power_profile(tmp_path):
    prof = write_profile(tmp_path, BALL_15)
    out = tmp_path / "out"
    assert run(["classify", "--profile", prof, "--out", str(out)]) == 0
    verdicts = json.loads((out / "verdicts.json").read_text())
    assert verdicts["esa_collar"]["outcome"] == "Proven"
    assert verdicts["sc_collar"]["outcome"] == "Proven"


def test_classify_sc_without_esa(tmp_path):
    # gamma = 1, beta = 0: mass criterion holds with the log margin while
    # the self-adjointness ratio fails -- the condition sets differ
    prof = write_profile(tmp_path, BALL_G1)
    out = tmp_path / "out"
    assert run(["classify", "--profile", prof, "--out", str(out)]) == 0
    verdicts = json.loads((out / "verdicts.json").read_text())
    assert verdicts["esa_collar"]["outcome"] == "NotProven"
    assert verdicts["sc_collar"]["outcome"] == "Proven"


def test_classify_half_strip_witness(tmp_path):
    prof = write_profile(tmp_path, HALF_STRIP)
    out = tmp_path / "out"
    assert run(["classify", "--profile", prof, "--out", str(out)]) == 0
    verdicts = json.loads((out / "verdicts.json").read_text())
    assert verdicts["assumption_A"]["holds"] is False
    assert "midline" in verdicts["assumption_A"]["witness"]
    assert verdicts["esa_metric"]["outcome"] == "Inconclusive"
    assert verdicts["esa_collar"]["outcome"] == "Inconclusive"


def test_classify_missing_profile(tmp_path):
    assert run(["classify", "--profile", str(tmp_path / "nope.toml"),
                "--out", str(tmp_path / "o")]) == cli.EXIT_INPUT


def test_classify_invariant_violation(tmp_path):
    prof = write_profile(tmp_path, BAD_WEIGHT)
    assert run(["classify", "--profile", prof,
                "--out", str(tmp_path / "o")]) == cli.EXIT_INVARIANT


def test_oracle_outputs(tmp_path):
    prof = write_profile(tmp_path, BALL_15)
    out = tmp_path / "out"
    assert run(["oracle", "--profile", prof, "--out", str(out)]) == 0
    rec = json.loads((out / "oracle.json").read_text())
    assert rec["comp0"]["weyl"] == "LimitPoint"
    assert rec["comp0"]["conservative"] is True


def test_sweep_reproduces_flip_points(tmp_path):
    out = tmp_path / "out"
    assert run(["sweep", "--beta", "0:2:0.25", "--gamma", "0:0:1",
                "--out", str(out)]) == 0
    with open(out / "sweep.csv", newline="") as fh:
        rows = {float(r["beta"]): r for r in csv.DictReader(fh)}
    assert rows[1.25]["weyl_class"] == "LimitCircle"
    assert rows[1.5]["weyl_class"] == "LimitPoint"
    assert rows[0.75]["feller_class"] == "Regular"
    assert rows[1.0]["feller_class"] == "Entrance"
    assert rows[1.0]["criteria_sc"] == "Proven"
    assert rows[1.5]["criteria_esa"] == "Proven"
    assert rows[1.25]["criteria_esa"] == "NotProven"


def test_sweep_empty_grid(tmp_path):
    assert run(["sweep", "--out", str(tmp_path / "o")]) == cli.EXIT_INPUT
    assert run(["sweep", "--beta", "2:1:0.5",
                "--out", str(tmp_path / "o")]) == cli.EXIT_INPUT


def test_report_consistent_then_injected_fault(tmp_path):
    out = tmp_path / "out"
    assert run(["sweep", "--beta", "0.5:2:0.5", "--gamma", "0:0:1",
                "--out", str(out)]) == 0
    assert run(["report", "--out", str(out)]) == 0
    assert (out / "report.txt").exists()
    assert (out / "plot_flip_points.csv").exists()

    # flip one oracle row: SC proven + Regular endpoint must trip exit 4
    path = out / "sweep.csv"
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
        fields = list(rows[0].keys())
    for r in rows:
        if r["criteria_sc"] == "Proven":
            r["feller_class"] = "Regular"
            break
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
    assert run(["report", "--out", str(out)]) == cli.EXIT_CONTRADICTION


def test_report_missing_inputs(tmp_path):
    assert run(["report", "--out", str(tmp_path / "empty")]) == cli.EXIT_INPUT


def test_sweep_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(["sweep", "--beta", "0.5:1.5:0.5", "--gamma=-1:1:1",
                    "--out", str(out), "--seed", "7"]) == 0
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()


def test_simulate_and_hardy_commands(tmp_path):
    prof = write_profile(tmp_path, BALL_15)
    out = tmp_path / "out"
    assert run(["simulate", "--profile", prof, "--out", str(out),
                "--grid-levels", "3"]) == 0
    assert (out / "sim_retention.csv").exists()
    assert (out / "mass_trace.csv").exists()
    assert run(["hardy", "--profile", prof, "--out", str(out)]) == 0
    rep = json.loads((out / "hardy.json").read_text())
    assert rep["min_slack"] >= -1e-8
