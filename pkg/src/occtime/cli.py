"""Command-line front end.

    occtime moments --positivity const:0.5 --t 1 --m 4
    occtime verify sphere --d 3 --hurst 0.5 --m-max 6 --trials 1000000 --seed 7
    occtime simulate bm --t 1 --steps 1024 --seed 1 --output path.csv

Exit status: 0 pass, 1 statistical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

from . import moment_engine, montecarlo, processes, sphere
from ._rng import SEED_ENV_VAR, as_generator, default_seed
from .combinatorics import rising_factorial

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# `verify all`: acceptance-scale runs with fixed seeds
ALL_RUNS = [
    ("recursion", {}),
    ("spitzer", {}),
    ("baxter", {}),
    ("engine", {}),
    ("geometry", {}),
    ("arcsine", {}),
    ("sphere", {"d": 2, "hurst": 0.5}),
    ("sphere", {"d": 3, "hurst": 0.5}),
    ("sphere", {"d": 3, "hurst": 0.25}),
    ("bridge", {}),
    ("subordinator", {}),
]


class UsageError(Exception):
    pass


def parse_positivity(spec: str) -> moment_engine.PositivityFunction:
    """``const:<c>``, ``erf:<mu>`` or ``table:<csv path>`` (columns time,value)."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "const":
            return moment_engine.Constant(float(arg))
        if kind == "erf":
            return moment_engine.ErfDrift(float(arg))
        if kind == "table":
            times, values = [], []
            with open(arg, newline="") as fh:
                for row in csv.reader(fh):
                    if not row or row[0].strip().lower() == "time":
                        continue
                    times.append(float(row[0]))
                    values.append(float(row[1]))
            return moment_engine.Tabulated(tuple(times), tuple(values))
    except (ValueError, OSError, IndexError) as exc:
        raise UsageError(f"bad positivity spec {spec!r}: {exc}") from exc
    raise UsageError(f"bad positivity spec {spec!r}; expected const:<c>, erf:<mu> or table:<csv>")


def cmd_moments(args) -> int:
    p = parse_positivity(args.positivity)
    if args.t <= 0 or args.m < 1 or args.grid < 2:
        raise UsageError("need t > 0, m >= 1 and grid >= 2")
    try:
        results = moment_engine.occupation_moments(p, args.t, range(1, args.m + 1), moment_engine.TimeGrid(args.t, args.grid))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = []
    for r in results:
        closed = None
        if isinstance(p, moment_engine.Constant):
            closed = args.t**r.m * float(rising_factorial(Fraction(p.c), r.m)) / math.factorial(r.m)
        rows.append((r.m, r.value, closed, None if closed is None else abs(r.value - closed)))

    buf = io.StringIO()
    if args.format == "json":
        json.dump([dict(m=m, value=v, closed_form=c, abs_diff=d) for m, v, c, d in rows], buf, indent=2)
        buf.write("\n")
    elif args.format == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "moment", "closed_form", "abs_diff"])
        for m, v, c, d in rows:
            w.writerow([m, repr(v), "" if c is None else repr(c), "" if d is None else repr(d)])
    else:
        buf.write(f"{'m':>3}  {'E[A_t^m]':>18}  {'closed form':>18}  {'abs diff':>10}\n")
        for m, v, c, d in rows:
            cs = "-" if c is None else f"{c:.12g}"
            ds = "-" if d is None else f"{d:.2e}"
            buf.write(f"{m:>3}  {v:>18.12g}  {cs:>18}  {ds:>10}\n")
    _emit(buf.getvalue(), args.output)
    return EXIT_PASS


def _emit(text: str, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _experiment_config(args) -> dict:
    cfg = {"seed": args.seed, "threads": args.threads}
    for key in ("trials", "paths", "steps", "d", "hurst", "m_max", "n"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def cmd_verify(args) -> int:
    timing = not args.no_timing
    if args.experiment == "all":
        reports = [montecarlo.run_experiment(name, dict(cfg, seed=args.seed, threads=args.threads)) for name, cfg in ALL_RUNS]
        payload = json.dumps([r.to_dict(timing) for r in reports], indent=2)
    elif args.experiment in montecarlo.EXPERIMENTS:
        reports = [montecarlo.run_experiment(args.experiment, _experiment_config(args))]
        payload = reports[0].to_json(timing)
    else:
        sys.stderr.write(
            f"unknown experiment {args.experiment!r}; valid: {', '.join(list(montecarlo.EXPERIMENTS) + ['all'])}\n"
        )
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(payload + "\n")
    else:
        sys.stdout.write(payload + "\n")
    if not args.quiet:
        for r in reports:
            for line in r.summary_lines():
                sys.stderr.write(line + "\n")
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


def cmd_simulate(args) -> int:
    spec = args.process
    kind, *params = spec.split(":")
    rng = as_generator(args.seed)
    try:
        if kind == "sfbm":
            if len(params) != 2:
                raise ValueError("expected sfbm:<d>:<H>")
            cfg = sphere.SfbmConfig(int(params[0]), float(params[1]))
            pts = sphere.uniform_sphere_sample(cfg.d, args.points, rng)
            values = sphere.sample_sfbm_at(pts, cfg, rng)
            if args.output:
                sphere.export_field_csv(args.output, pts, values)
            else:
                buf = io.StringIO()
                _write_field(buf, pts, values)
                sys.stdout.write(buf.getvalue())
            return EXIT_PASS
        if kind == "bm" and not params:
            path = processes.simulate_bm(args.t, args.steps, rng)
        elif kind == "stable" and len(params) == 1:
            path = processes.simulate_symmetric_stable(float(params[0]), args.t, args.steps, rng)
        elif kind == "subordinator" and len(params) == 1:
            path = processes.simulate_drifted_half_stable_subordinator(float(params[0]), args.t, args.steps, rng)
        elif kind == "bridge" and len(params) <= 1:
            alpha = float(params[0]) if params else 2.0
            path = processes.simulate_bridge(1.0, args.steps, rng, alpha=alpha)
        else:
            raise ValueError("expected bm, stable:<alpha>, subordinator:<mu>, bridge or sfbm:<d>:<H>")
    except ValueError as exc:
        raise UsageError(f"bad process spec {spec!r}: {exc}") from exc
    if args.output:
        path.to_csv(args.output)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["time", "value"])
        for t, v in zip(path.times, path.values):
            w.writerow([repr(float(t)), repr(float(v))])
    return EXIT_PASS


def _write_field(fh, pts, values):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(pts.shape[1])] + ["value"])
    for row, v in zip(pts, values):
        w.writerow([repr(float(c)) for c in row] + [repr(float(v))])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="occtime",
        description="Occupation-time moments, process simulation and verification experiments.",
        epilog=f"The default seed can be overridden with the {SEED_ENV_VAR} environment variable.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mo = sub.add_parser("moments", help="exact occupation-time moments from a positivity function")
    mo.add_argument("--positivity", required=True, help="const:<c> | erf:<mu> | table:<csv path>")
    mo.add_argument("--t", type=float, default=1.0, help="time horizon (default 1)")
    mo.add_argument("--m", type=int, default=4, help="highest moment order (default 4)")
    mo.add_argument("--grid", type=int, default=4096, help="quadrature intervals (default 4096)")
    mo.add_argument("--format", choices=("table", "csv", "json"), default="table")
    mo.add_argument("--output", help="write to this file instead of stdout")
    mo.set_defaults(func=cmd_moments)

    ve = sub.add_parser("verify", help="run a verification experiment; exit 0 iff it passes")
    ve.add_argument("experiment", help=f"one of {', '.join(montecarlo.EXPERIMENTS)} or all")
    ve.add_argument("--seed", type=int, default=None, help=f"run seed (default ${SEED_ENV_VAR} or built-in)")
    ve.add_argument("--trials", type=int, help="Bernoulli trials per estimate (default 10^6; 10^4 for baxter, 10^5 for subordinator)")
    ve.add_argument("--paths", type=int, help="paths for distribution checks (default 10^5)")
    ve.add_argument("--steps", type=int, help="grid steps per path (default 8192)")
    ve.add_argument("--d", type=int, help="sphere dimension for sphere (default 3)")
    ve.add_argument("--hurst", type=float, help="Hurst index for sphere (default 0.5)")
    ve.add_argument("--m-max", dest="m_max", type=int, help="highest moment order")
    ve.add_argument("--n", type=int, help="number of planar points for baxter (default 2..8)")
    ve.add_argument("--threads", type=int, default=None, help="worker cap; results do not depend on it")
    ve.add_argument("--output", help="write the JSON report here")
    ve.add_argument("--no-timing", action="store_true", help="omit runtime_ms so reports are byte-reproducible")
    ve.add_argument("--quiet", action="store_true", help="suppress the per-entry summary on stderr")
    ve.set_defaults(func=cmd_verify)

    si = sub.add_parser("simulate", help="export a simulated path or sphere field as CSV")
    si.add_argument("process", help="bm | stable:<alpha> | subordinator:<mu> | bridge | sfbm:<d>:<H>")
    si.add_argument("--t", type=float, default=1.0, help="horizon (bridges always use 1)")
    si.add_argument("--steps", type=int, default=1024)
    si.add_argument("--points", type=int, default=256, help="points for sfbm")
    si.add_argument("--seed", type=int, default=None)
    si.add_argument("--output", help="CSV path (default stdout)")
    si.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None and hasattr(args, "seed"):
        args.seed = default_seed()
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2


if __name__ == "__main__":
    sys.exit(main())
