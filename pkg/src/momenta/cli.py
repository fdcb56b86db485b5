"""Command-line front end: ``momenta verify|simulate|roots|transversal``.

Exit codes: 0 when every check passes, 1 when a check or an integration
fails (the report is still written), 2 for usage errors such as an unknown
scenario.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import lie
from . import roots as RW
from . import scenarios as S
from .errors import IntegrationFailure

SCHEMA = 1


def _round(obj):
    """Round every float to 15 significant digits for byte-stable output."""
    if isinstance(obj, float) or isinstance(obj, np.floating):
        v = float(obj)
        return float(f"{v:.15g}") if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    return obj


def dumps(obj):
    return json.dumps(_round(obj), indent=1, sort_keys=False)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario")
    common.add_argument("--algebra")
    common.add_argument("--T", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--out")
    common.add_argument("--parallel", type=int)
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--config", help="JSON file with the same keys; flags win")
    common.add_argument("--timing", action="store_true", help="include wall time in reports")

    parser = argparse.ArgumentParser(prog="momenta", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run a scenario's check battery")
    sub.add_parser("simulate", parents=[common], help="write a trajectory with conserved quantities")
    sub.add_parser("roots", parents=[common], help="root system, faces, and isotropy dimensions")
    sub.add_parser("transversal", parents=[common], help="per-point Poisson transversal reports")
    return parser


DEFAULTS = {"algebra": "su3", "seed": 42, "samples": 20, "out": ".", "parallel": 1, "format": "json"}
KEYS = ("scenario", "algebra", "T", "dt", "seed", "samples", "out", "parallel", "format")


class UsageError(Exception):
    pass


def resolve(args):
    """Merge defaults, the JSON config file, and flags (in increasing priority)."""
    merged = dict(DEFAULTS)
    tolerances = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        tolerances = dict(data.pop("tolerances", {}))
        unknown = set(data) - set(KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        merged.update({k: v for k, v in data.items() if v is not None})
    for k in KEYS:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    if os.environ.get("MOMENTA_OUT"):
        merged["out"] = os.environ["MOMENTA_OUT"]
    if merged.get("dt") is not None and merged["dt"] <= 0:
        raise UsageError("dt must be positive")
    if int(merged["samples"]) < 1:
        raise UsageError("samples must be at least 1")
    cfg = S.Config(
        scenario=merged.get("scenario") or "",
        algebra=merged["algebra"],
        T=merged.get("T"),
        dt=merged.get("dt"),
        seed=int(merged["seed"]),
        samples=int(merged["samples"]),
        parallel=max(1, int(merged["parallel"])),
        tolerances=tolerances,
    )
    return cfg, Path(merged["out"]), merged["format"]


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def run_verify(cfg, out, fmt, timing=False):
    if cfg.scenario not in S.VERIFY_SCENARIOS:
        raise UsageError(f"unknown scenario {cfg.scenario!r}; choose from {sorted(S.VERIFY_SCENARIOS)}")
    t0 = time.perf_counter()
    checks = S.run_checks(S.VERIFY_SCENARIOS[cfg.scenario](), cfg)
    report = {"schema": SCHEMA, "scenario": cfg.scenario, "checks": checks}
    if timing:
        report["wall_time"] = time.perf_counter() - t0
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "paper_anchor", "residual", "tolerance", "pass"])
        for c in _round(checks):
            w.writerow([c["name"], c["paper_anchor"], c["residual"], c["tolerance"], c["pass"]])
        text = buf.getvalue()
        _write(out / f"{cfg.scenario}.report.csv", text)
    else:
        text = dumps(report) + "\n"
        _write(out / f"{cfg.scenario}.report.json", text)
    for c in checks:
        print(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']}: residual={c['residual']} tol={c['tolerance']}")
    return 0 if all(c["pass"] for c in checks) else 1


def run_simulate(cfg, out, fmt, timing=False):
    if cfg.scenario not in S.SIMULATE_SCENARIOS:
        raise UsageError(f"unknown scenario {cfg.scenario!r}; choose from {sorted(S.SIMULATE_SCENARIOS)}")
    status = 0
    try:
        tr = S.SIMULATE_SCENARIOS[cfg.scenario](cfg)
    except IntegrationFailure as exc:
        tr = exc.partial
        status = 1
        print(f"integration failure: {exc}; writing partial output", file=sys.stderr)
    stem = f"{cfg.scenario}.trajectory" + (".partial" if status else "")
    if fmt == "csv":
        out.mkdir(parents=True, exist_ok=True)
        tr.to_csv(out / f"{stem}.csv")
    else:
        _write(out / f"{stem}.json", tr.to_json() + "\n")
    print(f"wrote {len(tr)} rows to {out / stem}.{fmt}")
    return status


def run_roots(cfg, out, fmt, timing=False):
    try:
        alg = lie.algebra_by_name(cfg.algebra)
    except Exception as exc:
        raise UsageError(str(exc)) from exc
    data = RW.summary(RW.root_decomposition(alg))
    report = {"schema": SCHEMA, **data}
    text = dumps(report) + "\n"
    _write(out / f"roots-{cfg.algebra}.json", text)
    print(text, end="")
    return 0


def run_transversal(cfg, out, fmt, timing=False):
    if cfg.scenario not in S.TRANSVERSAL_SCENARIOS:
        raise UsageError(f"unknown scenario {cfg.scenario!r}; choose from {list(S.TRANSVERSAL_SCENARIOS)}")
    report = {"schema": SCHEMA, "scenario": cfg.scenario, "points": S.transversal_points(cfg.scenario, cfg)}
    text = dumps(report) + "\n"
    _write(out / f"transversal-{cfg.scenario}.json", text)
    print(text, end="")
    return 0


COMMANDS = {"verify": run_verify, "simulate": run_simulate, "roots": run_roots, "transversal": run_transversal}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, out, fmt = resolve(args)
        return COMMANDS[args.command](cfg, out, fmt, args.timing)
    except UsageError as exc:
        print(f"momenta: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
