"""Command-line surface: classify profiles, run oracles, sweeps, reports.

Exit codes form the CI contract: 0 success, 2 bad input, 3 profile
invariant violation, 4 a Proven verdict contradicted by an oracle (a
release blocker).  All outputs are deterministic for a fixed config and
seed: JSON is written with sorted keys and CSV rows in sorted order.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import criteria, fpsim, geometry, quadform, sturm
from .errors import ConfineLabError
from .profiles import CoefficientProfile, load_profile, normal_model_profile

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3
EXIT_CONTRADICTION = 4


def _parse_range(spec: str) -> list[float]:
    """Parse 'a:b:step' into an inclusive grid."""
    try:
        a, b, step = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise ValueError(f"range must be a:b:step, got {spec!r}") from exc
    if step <= 0 or b < a:
        raise ValueError(f"empty or invalid range {spec!r}")
    n = int(round((b - a) / step))
    return [a + i * step for i in range(n + 1) if a + i * step <= b + 1e-12]


def _parse_tols(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValueError(f"--tol expects k=v, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = float(v)
    return out


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")


def _load(args) -> CoefficientProfile:
    if not args.profile:
        raise ValueError("--profile is required for this command")
    return load_profile(args.profile)


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

def cmd_classify(args) -> int:
    try:
        profile = _load(args)
    except (OSError, ValueError, KeyError, ConfineLabError) as exc:
        print(f"error: cannot read profile: {exc}", file=sys.stderr)
        return EXIT_INPUT
    diags = profile.validate()
    if diags:
        for d in diags:
            print(f"invariant: {d}", file=sys.stderr)
        return EXIT_INVARIANT
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    verdicts = criteria.classify_all(profile)
    _json_dump(verdicts, out_dir / "verdicts.json")
    for key in sorted(verdicts):
        v = verdicts[key]
        if isinstance(v, dict) and "outcome" in v:
            print(f"{key}: {v['outcome']} [{v['theorem']}]")
        elif key == "geometry":
            print(f"geometry: {v['case']} diam={v['diam_estimate']}")
        elif key == "assumption_A":
            state = {True: "holds", False: "fails", None: "unknown"}[v["holds"]]
            extra = f" ({v['witness']})" if v["witness"] else ""
            print(f"assumption_A: {state}{extra}")
    return EXIT_OK


def _oracle_record(profile: CoefficientProfile, c: float, E: float) -> dict:
    out = {}
    for comp in profile.components:
        codim = profile.domain.dim - comp.d_j
        if codim == 1:
            sl = sturm.reduce_normal_model(comp, c, dim=profile.domain.dim)
        elif comp.d_j == 0 and comp.id == 0:
            sl = sturm.reduce_radial(profile, c)
        else:
            continue
        fel = sturm.feller_classify(sl, 0)
        wey = sturm.weyl_classify(sl, 0, E=E)
        out[f"comp{comp.id}"] = {
            "feller": fel.feller,
            "weyl": wey.weyl,
            "sigma_integral": list(map(str, fel.sigma_integral)),
            "n_integral": list(map(str, fel.n_integral)),
            "conservative": fel.feller in (sturm.ENTRANCE, sturm.NATURAL),
            "esa_1d": wey.weyl == sturm.LIMIT_POINT,
        }
    return out


def cmd_oracle(args) -> int:
    try:
        profile = _load(args)
    except (OSError, ValueError, KeyError, ConfineLabError) as exc:
        print(f"error: cannot read profile: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    E = args.tols.get("E", -1.0)
    rec = _oracle_record(profile, c=1.0, E=E)
    _json_dump(rec, out_dir / "oracle.json")
    for k in sorted(rec):
        print(f"{k}: feller={rec[k]['feller']} weyl={rec[k]['weyl']}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        profile = _load(args)
    except (OSError, ValueError, KeyError, ConfineLabError) as exc:
        print(f"error: cannot read profile: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    comp = profile.components[0]
    model = (quadform.normal_model(profile, 0, c=1.0)
             if comp.d_j == profile.domain.dim - 1
             else quadform.radial_model(profile, c=1.0))
    T = args.tols.get("T", 0.25)
    levels = max(3, args.grid_levels)
    hs = [2.0 ** (-(8 + k)) for k in range(levels)]
    study = fpsim.refine_study(model, hs, T=T)
    study.to_csv(out_dir / "sim_retention.csv")
    grid = fpsim.graded_fv_grid(model, hs[-1])
    trace, _ = fpsim.run(model, grid, T=T)
    trace.to_csv(out_dir / "mass_trace.csv")
    print(f"retentions: {['%.5f' % r for r in study.retentions]}")
    print(f"extrapolated: {study.extrapolated:.6f} (monotone={study.monotone})")
    return EXIT_OK


def cmd_hardy(args) -> int:
    try:
        profile = _load(args)
    except (OSError, ValueError, KeyError, ConfineLabError) as exc:
        print(f"error: cannot read profile: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = np.geomspace(1e-6, 1.0, 257)
    rep = quadform.hardy_inequality_check(profile, grid, n_samples=500,
                                          seed=args.seed or 0xC0FFEE)
    _json_dump({"min_slack": rep.min_slack, "n_samples": rep.n_samples,
                "C1": rep.C1, "nu1": rep.nu1, "worst_sample": rep.worst_sample},
               out_dir / "hardy.json")
    print(f"min slack: {rep.min_slack:.3e} over {rep.n_samples} samples")
    return EXIT_OK


def _sweep_point(task):
    beta, gamma, dim, d_j, E, with_sim = task
    profile = normal_model_profile(beta, gamma, dim=dim, d_j=d_j)
    v_esa = criteria.classify_esa(profile).outcome
    v_sc = criteria.classify_sc(profile).outcome
    sl = sturm.reduce_normal_model(profile.components[0], 1.0, dim=dim)
    fel = sturm.feller_classify(sl, 0).feller
    wey = sturm.weyl_classify(sl, 0, E=E).weyl
    row = {"beta": beta, "gamma": gamma, "d": dim, "d_j": d_j,
           "feller_class": fel, "weyl_class": wey,
           "criteria_sc": v_sc, "criteria_esa": v_esa}
    if with_sim:
        model = quadform.normal_model(profile, 0, c=1.0)
        study = fpsim.refine_study(model, [2.0**-8, 2.0**-9, 2.0**-10], T=0.25)
        row["retention"] = f"{study.extrapolated:.6f}"
    return row


SWEEP_FIELDS = ["beta", "gamma", "d", "d_j", "feller_class", "weyl_class",
                "criteria_sc", "criteria_esa"]


def cmd_sweep(args) -> int:
    try:
        betas = _parse_range(args.beta) if args.beta else []
        gammas = _parse_range(args.gamma) if args.gamma else [0.0]
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not betas:
        print("error: empty beta grid", file=sys.stderr)
        return EXIT_INPUT
    dim = args.dim
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    E = args.tols.get("E", -1.0)
    tasks = [(b, g, dim, dim - 1, E, args.with_sim)
             for b in betas for g in gammas]
    workers = int(os.environ.get("CONFINE_LAB_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    rows.sort(key=lambda r: (r["beta"], r["gamma"]))
    fields = SWEEP_FIELDS + (["retention"] if args.with_sim else [])
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow(r)
    print(f"wrote {len(rows)} rows to {out_dir / 'sweep.csv'}")
    return EXIT_OK


def _row_contradiction(row: dict) -> str | None:
    if row["criteria_sc"] == criteria.PROVEN and row["feller_class"] in (
            sturm.REGULAR, sturm.EXIT):
        return "SC proven but the boundary is accessible (mass can leak)"
    if row["criteria_esa"] == criteria.PROVEN and row["weyl_class"] == sturm.LIMIT_CIRCLE:
        return "ESA proven but the endpoint is limit circle"
    return None


def cmd_report(args) -> int:
    out_dir = Path(args.out)
    sweep_path = out_dir / "sweep.csv"
    if not sweep_path.exists():
        print(f"error: missing {sweep_path}; run sweep first", file=sys.stderr)
        return EXIT_INPUT
    with open(sweep_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        print("error: sweep.csv is empty", file=sys.stderr)
        return EXIT_INPUT
    contradictions = []
    for row in rows:
        why = _row_contradiction(row)
        if why:
            contradictions.append((row, why))
    lines = [f"rows: {len(rows)}"]
    for q, col in (("SC", "criteria_sc"), ("ESA", "criteria_esa")):
        proven = sum(1 for r in rows if r[col] == criteria.PROVEN)
        lines.append(f"{q}: {proven} proven / {len(rows)}")
    lines.append(f"contradictions: {len(contradictions)}")
    (out_dir / "report.txt").write_text("\n".join(lines) + "\n")
    with open(out_dir / "plot_flip_points.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma", "min_beta_esa_proven", "min_beta_sc_proven"])
        by_gamma: dict = {}
        for r in rows:
            by_gamma.setdefault(float(r["gamma"]), []).append(r)
        for g in sorted(by_gamma):
            grp = sorted(by_gamma[g], key=lambda r: float(r["beta"]))
            first_esa = next((r["beta"] for r in grp
                              if r["criteria_esa"] == criteria.PROVEN), "")
            first_sc = next((r["beta"] for r in grp
                             if r["criteria_sc"] == criteria.PROVEN), "")
            w.writerow([g, first_esa, first_sc])
    print("\n".join(lines))
    if contradictions:
        for row, why in contradictions:
            print(f"CONTRADICTION beta={row['beta']} gamma={row['gamma']}: {why}",
                  file=sys.stderr)
        return EXIT_CONTRADICTION
    return EXIT_OK


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="confine-lab",
        description="sufficient-condition checks and numerical oracles for "
                    "boundary confinement of drift-diffusion operators")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", help="TOML profile file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--tol", action="append", metavar="k=v",
                        help="override a named tolerance/parameter")
    common.add_argument("--beta", help="beta grid a:b:step")
    common.add_argument("--gamma", help="gamma grid a:b:step")
    common.add_argument("--grid-levels", type=int, default=3,
                        help="number of refinement levels")
    common.add_argument("--dim", type=int, default=2, help="ambient dimension")
    common.add_argument("--with-sim", action="store_true",
                        help="add simulator retention to sweep rows")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common]).set_defaults(fn=cmd_classify)
    sub.add_parser("oracle", parents=[common]).set_defaults(fn=cmd_oracle)
    sub.add_parser("simulate", parents=[common]).set_defaults(fn=cmd_simulate)
    sub.add_parser("hardy", parents=[common]).set_defaults(fn=cmd_hardy)
    sub.add_parser("sweep", parents=[common]).set_defaults(fn=cmd_sweep)
    sub.add_parser("report", parents=[common]).set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.tols = _parse_tols(args.tol)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
