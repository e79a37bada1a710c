"""Command-line interface: ``stein-spc {calibrate,table,monitor,phase1}``.

Exit codes: 0 success, 1 usage, 2 input data, 3 numerical/estimation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io, tables
from ._random import resolve_seed
from .calibrate import c_chart_design, find_L
from .charts import ChartKind, ChartSpec, monitor
from .exceptions import (
    BracketError,
    CalibrationError,
    EstimationError,
    InputDataError,
    ParameterError,
    SpecError,
    TruncationError,
    DegenerateDataError,
)
from .phase1 import phase1_report
from .simrl import DEFAULT_TARGET_ARL, table
from .stein import WeightFunction

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("steinspc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, default=io._jsonable)
    print(text)
    if out:
        Path(out).write_text(text + "\n")


def cmd_calibrate(args) -> int:
    seed = resolve_seed(args.seed)
    kind = ChartKind.parse(args.chart)
    if kind is ChartKind.CCHART:
        d = c_chart_design(args.mu0, args.target)
        spec = ChartSpec(kind, args.mu0, c_threshold=d.threshold)
        rec = io.design_record(
            spec, achieved_arl=d.achieved_arl, se=0.0, reps=0, seed=seed,
            neighbours={"below": list(d.below), "above": list(d.above)},
        )
        _emit(rec, args.out)
        return EXIT_OK
    if kind in (ChartKind.AB, ChartKind.ABC) and args.weight is None:
        raise UsageError(f"--weight is required for --chart {args.chart}")
    spec = ChartSpec(kind, args.mu0, args.lam, args.weight, truncation=args.truncation)
    cal = find_L(
        spec, target_arl=args.target, reps=args.reps, seed=seed,
        bracket=tuple(args.bracket) if args.bracket else None,
        rel_tol=args.rel_tol, max_t=args.max_t, n_jobs=args.jobs,
    )
    rec = io.design_record(
        spec.with_L(cal.L), achieved_arl=cal.achieved_arl, se=cal.se,
        reps=args.reps, seed=seed, target_arl=args.target,
    )
    _emit(rec, args.out)
    return EXIT_OK


def cmd_table(args) -> int:
    seed = resolve_seed(args.seed)
    grid = tables.paper_grid(args.table, args.mu0, tau=args.tau, lam=args.lam)
    if not grid:
        raise UsageError("no published design for the requested mu0 values")
    max_t = args.max_t or 37_000
    cells = table(grid, reps=args.reps, seed=seed, max_t=max_t, n_jobs=args.jobs)
    rows = tables.rows(cells)
    print(tables.format_blocks(rows))
    for r in rows:
        if r["error"]:
            print(f"cell {r}: {r['error']}", file=sys.stderr)
    if args.out:
        prefix = Path(args.out)
        io.write_table_csv(prefix.with_suffix(".csv"), rows)
        io.write_json(
            {"schema": io.SCHEMA, "table": args.table, "reps": args.reps, "seed": seed,
             "max_t": max_t, "cells": rows},
            prefix.with_suffix(".json"),
        )
    return EXIT_OK


def _monitor_spec(args) -> ChartSpec:
    if args.design:
        return io.load_design(args.design)
    if args.chart is None or args.mu0 is None:
        raise UsageError("give --design or both --chart and --mu0")
    kind = ChartKind.parse(args.chart)
    if kind is ChartKind.CCHART:
        if args.threshold is None:
            raise UsageError("--threshold is required for the c-chart")
        return ChartSpec(kind, args.mu0, c_threshold=args.threshold)
    if args.L is None:
        raise UsageError("--L is required")
    if kind in (ChartKind.AB, ChartKind.ABC) and args.weight is None:
        raise UsageError(f"--weight is required for --chart {args.chart}")
    return ChartSpec(kind, args.mu0, args.lam, args.weight, L=args.L)


def cmd_monitor(args) -> int:
    spec = _monitor_spec(args)
    counts = io.read_counts(args.file)[args.skip:]
    if counts.size == 0:
        raise InputDataError("no observations left to monitor")
    res = monitor(spec, counts)
    if args.out:
        io.write_trajectory(args.out, counts, res)
    if args.svg:
        Path(args.svg).write_text(io.render_svg(spec, res))
    report = {
        "schema": io.SCHEMA,
        "chart": spec.describe(),
        "n": int(counts.size),
        "first_alarm": res.first_alarm,
        "n_alarms": res.n_alarms,
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_phase1(args) -> int:
    counts = io.read_counts(args.file)
    if args.t0:
        counts = counts[: args.t0]
    report = phase1_report(counts, args.max_lag)
    out = {"schema": io.SCHEMA, **report.to_dict()}
    out["overdispersion_warning"] = report.overdispersed(args.alpha)
    _emit(out, args.out)
    if out["overdispersion_warning"]:
        print(
            f"warning: dispersion index {report.disp_hat:.3f} rejects equidispersion "
            f"(p = {report.disp_pvalue:.3g} < {args.alpha}); a Poisson in-control model is questionable",
            file=sys.stderr,
        )
    return EXIT_OK


def _weight(value):
    try:
        return WeightFunction.parse(value)
    except ParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stein-spc", description="Stein-Chen EWMA charts for Poisson counts.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common_chart(sp, require_mu0):
        sp.add_argument("--chart", choices=["ewma", "ab", "abc", "c"], required=require_mu0)
        sp.add_argument("--weight", type=_weight, help="one, abslinear, absroot or log")
        sp.add_argument("--mu0", type=float, required=require_mu0, help="in-control Poisson mean")
        sp.add_argument("--lambda", dest="lam", type=float, default=0.1)

    def sim_opts(sp):
        sp.add_argument("--reps", type=int, default=10_000)
        sp.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                        help="64-bit master seed (default: $STEIN_SPC_SEED)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")
        sp.add_argument("--max-t", type=int, default=None, help="censoring horizon")

    c = sub.add_parser("calibrate", help="find L for a target in-control ARL")
    common_chart(c, True)
    sim_opts(c)
    c.add_argument("--target", type=float, default=DEFAULT_TARGET_ARL)
    c.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    c.add_argument("--rel-tol", type=float, default=0.01)
    c.add_argument("--truncation", type=int, default=None,
                   help="fixed truncation M for the Stein moments (50 reproduces the published designs)")
    c.add_argument("--out", help="write the design record here")
    c.set_defaults(func=cmd_calibrate)

    t = sub.add_parser("table", help="reproduce the zero-state ARL (1) or CED (2) table")
    t.add_argument("--table", type=int, choices=[1, 2], default=1)
    t.add_argument("--mu0", type=float, nargs="+", default=[2.0, 5.0])
    t.add_argument("--tau", type=int, default=100)
    t.add_argument("--lambda", dest="lam", type=float, default=0.1)
    sim_opts(t)
    t.add_argument("--out", help="output prefix; writes PREFIX.csv and PREFIX.json")
    t.set_defaults(func=cmd_table)

    m = sub.add_parser("monitor", help="apply a chart design to a count file")
    m.add_argument("file")
    m.add_argument("--design", help="JSON design record from 'calibrate'")
    common_chart(m, False)
    m.add_argument("--L", type=float)
    m.add_argument("--threshold", type=int, help="c-chart alarm threshold (alarm if x >= threshold)")
    m.add_argument("--skip", type=int, default=0, help="ignore the first N observations (Phase I)")
    m.add_argument("--out", help="trajectory CSV")
    m.add_argument("--svg", help="static SVG rendering")
    m.set_defaults(func=cmd_monitor)

    h = sub.add_parser("phase1", help="Phase-I diagnostics for a count file")
    h.add_argument("file")
    h.add_argument("--t0", type=int, default=None, help="use only the first T0 observations")
    h.add_argument("--max-lag", type=int, default=None)
    h.add_argument("--alpha", type=float, default=0.01)
    h.add_argument("--out")
    h.set_defaults(func=cmd_phase1)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, SpecError, ParameterError) as exc:
        print(f"stein-spc: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputDataError as exc:
        print(f"stein-spc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (EstimationError, CalibrationError, BracketError, TruncationError, DegenerateDataError) as exc:
        print(f"stein-spc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
