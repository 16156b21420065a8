"""Command-line front end: generate test data, run criterion scans, run
the property suites.

Exit-code policy: unsatisfied criteria are data, not errors (exit 0);
per-row evaluation problems (empty windows, out-of-range parameters) are
recorded inside the report and still exit 0.  Only mechanical failures
(unreadable input, solver aborts) exit 1, and usage errors exit 2.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import reports
from .criteria import CriterionKind, evaluate_criterion
from .errors import NsregError, ValidationError
from .fields import ParabolicCylinder, load_series, save_series
from .quantities import beta_of_alpha
from .solver import SolverConfig, run as solver_run
from .spectral import SpectralWorkspace
from .suites import run_suite

ANALYZE_DEFAULT_CRITERIA = (
    "CKN_L3", "CKN_ORIG", "VASSEUR_P", "WZ", "PHUC",
    "L1_PRESSURE", "ALPHA_BETA", "SIGMA", "COR_L1_SIGMA", "SUP_A_SCAN",
)


def _positive_int(text):
    value = int(text)
    if value < 4:
        raise argparse.ArgumentTypeError(f"grid size must be >= 4, got {value}")
    return value


def _parse_point(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"point must be 'x,y,z,t', got {text!r}")
    return tuple(float(p) for p in parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsreg",
        description="Regularity diagnostics for discretized Navier-Stokes fields",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="run the mini solver and write an NSF1 file")
    gen.add_argument("--ic", choices=["taylor-green"], default="taylor-green")
    gen.add_argument("--n", type=_positive_int, default=32)
    gen.add_argument("--box-len", type=float, default=2.0)
    gen.add_argument("--nu", type=float, default=0.1)
    gen.add_argument("--dt", type=float, default=0.01)
    gen.add_argument("--t-end", type=float, default=0.4)
    gen.add_argument("--output-every", type=int, default=2)
    gen.add_argument("--no-dealias", action="store_true")
    gen.add_argument("--out", required=True)

    ana = sub.add_parser("analyze", help="evaluate criteria on an NSF1 file")
    ana.add_argument("--in", dest="input", required=True)
    ana.add_argument("--point", action="append", type=_parse_point, required=True,
                     metavar="X,Y,Z,T")
    ana.add_argument("--radius", action="append", type=float, required=True)
    ana.add_argument("--sigma", type=float, default=0.5)
    ana.add_argument("--alpha", type=float, default=1.5)
    ana.add_argument("--pressure-exp", type=float, default=1.25)
    ana.add_argument("--criteria", default="all")
    ana.add_argument("--epsilon", type=float, default=0.05)
    ana.add_argument("--seed", type=int, default=0)
    ana.add_argument("--jobs", type=int, default=1)
    ana.add_argument("--out", required=True)
    ana.add_argument("--csv", default=None)

    chk = sub.add_parser("check", help="run the property suites")
    chk.add_argument("--suite", required=True,
                     choices=["norms", "pressure", "energy", "oscillation", "all"])
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--n", type=int, default=None)
    return parser


def cmd_generate(args) -> int:
    cfg = SolverConfig(
        n=args.n, box_len=args.box_len, viscosity=args.nu, dt=args.dt,
        t_end=args.t_end, output_every=args.output_every,
        dealias=not args.no_dealias,
    )
    try:
        series = solver_run(cfg)
        save_series(series, args.out)
    except NsregError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error writing {args.out}: {exc}", file=sys.stderr)
        return 1
    final = series.snapshots[-1]
    energy = 0.5 * float(np.mean(final.velocity.magnitude_squared()))
    print(f"wrote {args.out}: {len(series)} snapshots, final mean kinetic energy {energy:.6g}")
    return 0


def _criteria_list(spec_text: str, sigma: float, alpha: float, p_exp: float):
    names = ANALYZE_DEFAULT_CRITERIA if spec_text == "all" else tuple(
        s.strip() for s in spec_text.split(",") if s.strip())
    kinds = []
    for name in names:
        if name in ("SIGMA", "COR_L1_SIGMA"):
            kinds.append((name, {"sigma": sigma}))
        elif name == "ALPHA_BETA":
            kinds.append((name, {"alpha": alpha}))
        elif name == "VASSEUR_P":
            kinds.append((name, {"p_exponent": p_exp}))
        else:
            kinds.append((name, {}))
    return kinds


def cmd_analyze(args) -> int:
    try:
        series = load_series(args.input)
    except (OSError, NsregError) as exc:
        print(f"error reading {args.input}: {exc}", file=sys.stderr)
        return 1
    with open(args.input, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    ws = SpectralWorkspace(series.grid)

    kinds = _criteria_list(args.criteria, args.sigma, args.alpha, args.pressure_exp)
    tasks = []
    for point in args.point:
        for radius in args.radius:
            for name, params in kinds:
                tasks.append((point, radius, name, params))

    def evaluate(task):
        point, radius, name, params = task
        base = {
            "row_type": "criterion",
            "criterion": name,
            "params": dict(params),
            "point": list(point[:3]),
            "t0": point[3],
            "r": radius,
        }
        try:
            kind = CriterionKind(name, **params)
            cyl = ParabolicCylinder(point[:3], point[3], radius)
            report = evaluate_criterion(series, kind, cyl, args.epsilon, ws)
            row = report.to_row()
            values = [row["statistic"], *row["components"].values()]
            if not all(np.isfinite(v) for v in values):
                row = dict(base)
                row["error"] = f"non-finite statistic or component: {values}"
        except NsregError as exc:
            row = dict(base)
            row["error"] = str(exc)
        return row

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(evaluate, tasks))
    else:
        rows = [evaluate(t) for t in tasks]
    rows.sort(key=lambda r: (r["point"], r["t0"], r["r"], r["criterion"],
                             json.dumps(r.get("params", {}), sort_keys=True)))

    config = {
        "criteria": args.criteria,
        "sigma": args.sigma,
        "alpha": args.alpha,
        "beta": beta_of_alpha(args.alpha) if 1.2 <= args.alpha <= 2.0 else None,
        "pressure_exp": args.pressure_exp,
        "epsilon": args.epsilon,
        "seed": args.seed,
        "points": [list(p) for p in args.point],
        "radii": list(args.radius),
    }
    inputs = {"path": str(args.input), "sha256": digest}
    timestamp = datetime.now(timezone.utc).isoformat()
    document = reports.build_document(inputs, rows, config, timestamp)
    try:
        reports.write_json(document, args.out)
        if args.csv:
            reports.write_csv(document, args.csv)
    except OSError as exc:
        print(f"error writing report: {exc}", file=sys.stderr)
        return 1
    n_err = sum(1 for r in rows if "error" in r)
    n_sat = sum(1 for r in rows if r.get("satisfied") is True)
    print(f"wrote {args.out}: {len(rows)} rows, {n_sat} satisfied, {n_err} row errors")
    print(f"determinism hash: {document['provenance']['determinism_hash']}")
    return 0


def cmd_check(args) -> int:
    try:
        results = run_suite(args.suite, seed=args.seed, n=args.n)
    except NsregError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    all_passed = True
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        print(f"{tag} {res.name}: {res.detail}")
        all_passed = all_passed and res.passed
    return 0 if all_passed else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        return cmd_check(args)
    except ValidationError as exc:
        # bad argument combinations surface as usage errors
        parser.error(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
