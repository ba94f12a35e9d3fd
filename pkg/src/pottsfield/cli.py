"""Command-line surface: verify, eos, sweep, cusp, finite-n, mc.

All emitters are deterministic: floats are serialized with their shortest
round-trip representation (<= 17 significant digits), rows keep a fixed
order, CSV uses LF line endings and UTF-8.  A JSON config file can preset any
flag; explicit flags win.  Exit codes: 0 success, 1 verification failure,
2 usage error, 3 numeric/domain failure.
"""

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import exact, mc, singularity, solver, verify
from .errors import PottsError
from .model import ThermoPoint


def _fmt(v):
    """Shortest round-trip decimal for a float; plain str otherwise."""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    _write_text(path, text)


def _write_json(path, obj):
    _write_text(path, json.dumps(obj, indent=2) + "\n")


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _emit(path, fmt, header, rows):
    if fmt == "json":
        _write_json(path, [dict(zip(header, row)) for row in rows])
    else:
        _write_csv(path, header, rows)


def _jsonify(obj):
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def cmd_verify(args):
    report = verify.run_battery(seed=args.seed)
    _write_json(args.out, _jsonify(report))
    return 0 if report["passed"] else 1


def cmd_eos(args):
    pt = ThermoPoint(args.x, args.y, args.t)
    branches = solver.solve_branches(pt, _solver_cfg(args))
    eq, coexist = solver.select_equilibrium(branches)
    header = ["branch_id", "m1", "m2", "F", "classification", "residual", "is_equilibrium"]
    rows = [
        (
            i,
            float(b.m1),
            float(b.m2),
            float(b.F),
            b.classification,
            float(b.newton_residual),
            int(b is eq),
        )
        for i, b in enumerate(branches)
    ]
    _emit(args.out, args.format, header, rows)
    if coexist:
        print("coexistence: top two maxima are degenerate in F", file=sys.stderr)
    return 0


def cmd_sweep(args):
    xs = np.linspace(args.x_min, args.x_max, args.x_samples)
    if args.t_max is not None:
        ts = np.linspace(args.t, args.t_max, args.t_samples)
    else:
        ts = [args.t]
    cfg = _solver_cfg(args)

    def one(t):
        return solver.sweep_profile(args.y, xs, float(t), cfg)

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        results = list(pool.map(one, ts))

    header = ["x", "y", "t", "branch_id", "m1", "m2", "F", "is_equilibrium"]
    rows = []
    for t, sweep in zip(ts, results):
        for sample in sweep.samples:
            maxima = [b for b in sample.branches if b.classification == "maximum"]
            best = max(maxima, key=lambda b: b.F) if maxima else None
            for bid, b in zip(sample.branch_ids, sample.branches):
                rows.append(
                    (
                        float(sample.x),
                        args.y,
                        float(t),
                        bid,
                        float(b.m1),
                        float(b.m2),
                        float(b.F),
                        int(b is best),
                    )
                )
    _emit(args.out, args.format, header, rows)
    return 0


def cmd_cusp(args):
    header = ["locus_id", "m1", "m2", "t_c", "x", "y", "reason"]
    rows = []
    res = args.resolution
    for locus in ("I", "II"):
        for m2 in np.linspace(0.5, 1.0 - 1.0 / res, res):
            m1, t_c = singularity.cusp_locus_lines(float(m2), locus)
            if 2.0 * m2 - 1.0 < 1e-4:
                rows.append((locus, float(m1), float(m2), float(t_c), "", "",
                             "field map diverges as m2 -> 1/2"))
                continue
            x, y = singularity.line_image(float(m2), locus)
            rows.append((locus, float(m1), float(m2), float(t_c), x, y, ""))
    for locus, sign in (("III_plus", 1), ("III_minus", -1)):
        for m2 in np.linspace(0.5, 7.0 / 9.0, res):
            m1, t_c = singularity.cusp_locus_loop(float(m2), sign)
            x, y = singularity.loop_image(float(m2), sign)
            rows.append((locus, float(m1), float(m2), float(t_c), x, y, ""))
    # self-check on emit: every finite row must sit on the cusp set
    for row in rows:
        if row[6]:
            continue  # log-singular boundary row, annotated instead of checked
        det, tang = singularity.cusp_residuals_scaled(row[1], row[2], row[3])
        if max(abs(det), abs(tang)) > 1e-8:
            raise PottsError(f"emitted locus row fails the cusp conditions: {row}")
    _write_csv(args.out, header, rows)
    events = [
        {
            "kind": e.kind,
            "time": e.time,
            "locations": [[m1, m2] for m1, m2 in e.locations],
            "description": e.description,
        }
        for e in singularity.cusp_event_timeline()
    ]
    _write_json(args.events_out, events)
    return 0


def cmd_finite_n(args):
    pt = ThermoPoint(args.x, args.y, args.t)
    branches = solver.solve_branches(pt, _solver_cfg(args))
    eq, _ = solver.select_equilibrium(branches)
    rows = exact.convergence_table(args.N, pt, eq.F)
    header = ["N", "F_N", "abs_error"]
    _emit(args.out, args.format, header, [(n, f, e) for n, f, e in rows])
    return 0


def cmd_mc(args):
    pt = ThermoPoint(args.x, args.y, args.t)
    cfg = mc.McConfig(
        N=args.N[0] if isinstance(args.N, list) else args.N,
        sweeps=args.sweeps,
        burn_in=args.burn_in,
        thinning=args.thinning,
        seed=args.seed,
        chains=args.chains,
    )
    report = mc.mc_vs_exact(pt, cfg)
    _write_json(args.out, _jsonify(report))
    return 0


def _solver_cfg(args):
    kw = {}
    if getattr(args, "grid_points", None):
        kw["grid_points"] = args.grid_points
    return solver.SolverConfig(**kw)


def _add_common(p):
    p.add_argument("--config", help="JSON file presetting any flag of this command")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=1, help="worker threads for batch work")
    p.add_argument("--seed", type=int, default=0)


def _add_point(p):
    # required, but validated after the config merge so a config file can
    # supply them
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--t", type=float)
    _mark_required(p, "x", "y", "t")


def _mark_required(p, *names):
    existing = p.get_default("_required") or ()
    p.set_defaults(_required=tuple(existing) + names)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pottsfield",
        description="Mean-field three-state spin model: exact thermodynamics, "
        "equations of state, and cusp singularity maps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the exact-identity battery")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eos", help="all equation-of-state branches at one point")
    _add_common(p)
    _add_point(p)
    p.add_argument("--grid-points", type=int, help="multi-start grid resolution per axis")
    p.set_defaults(func=cmd_eos)

    p = sub.add_parser("sweep", help="branch profile along an x-range at fixed y")
    _add_common(p)
    p.add_argument("--y", type=float)
    p.add_argument("--x-min", type=float)
    p.add_argument("--x-max", type=float)
    p.add_argument("--x-samples", type=int, default=101)
    p.add_argument("--t", type=float)
    _mark_required(p, "y", "x_min", "x_max", "t")
    p.add_argument("--t-max", type=float, help="sweep a t-range instead of a single t")
    p.add_argument("--t-samples", type=int, default=5)
    p.add_argument("--grid-points", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cusp", help="cusp loci CSV and the canonical event timeline")
    _add_common(p)
    p.add_argument("--resolution", type=int, default=400, help="samples per locus")
    p.add_argument("--events-out", help="path for the events JSON (default: stdout)")
    p.set_defaults(func=cmd_cusp)

    p = sub.add_parser("finite-n", help="finite-N free-energy convergence table")
    _add_common(p)
    _add_point(p)
    p.add_argument("--N", type=int, action="append")
    _mark_required(p, "N")
    p.add_argument("--grid-points", type=int)
    p.set_defaults(func=cmd_finite_n)

    p = sub.add_parser("mc", help="Metropolis cross-check against exact enumeration")
    _add_common(p)
    _add_point(p)
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--sweeps", type=int, default=10_000)
    p.add_argument("--burn-in", type=int, default=1_000)
    p.add_argument("--thinning", type=int, default=1)
    p.add_argument("--chains", type=int, default=3)
    p.set_defaults(func=cmd_mc)

    return parser


def _apply_config(parser, argv):
    """Resolve flags against an optional JSON config; explicit flags win."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    with open(args.config, encoding="utf-8") as fh:
        overrides = json.load(fh)
    explicit = {a.lstrip("-").split("=")[0].replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise PottsError(f"config key {key!r} is not a flag of this command")
        if attr not in explicit:
            setattr(args, attr, value)
    return args


def _check_required(parser, args):
    missing = [
        "--" + name.replace("_", "-")
        for name in getattr(args, "_required", ())
        if getattr(args, name) is None
    ]
    if missing:
        parser.error(f"the following arguments are required: {', '.join(missing)}")


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        _check_required(parser, args)
        return args.func(args)
    except PottsError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (ValueError, OverflowError) as err:
        print(f"numeric error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
