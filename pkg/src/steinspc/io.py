"""File formats: count CSVs, design records, trajectories, tables and SVG."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .charts import ChartKind, ChartSpec, MonitorResult
from .exceptions import InputDataError
from .stein import WeightFunction

SCHEMA = "stein-spc/v1"


def read_counts(path) -> np.ndarray:
    """Read one nonnegative integer per line.

    Blank lines and lines starting with ``#`` are skipped.  A single
    non-numeric first data line is taken as a header.  If a line holds
    several comma-separated fields, the last one is used.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputDataError(f"cannot read {path}: {exc}") from None
    values = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        field = line.split(",")[-1].strip()
        try:
            num = float(field)
        except ValueError:
            if not values and not header_seen:
                header_seen = True
                continue
            raise InputDataError(f"not a number: {field!r}", line=lineno) from None
        if not math.isfinite(num) or num != int(num):
            raise InputDataError(f"not an integer count: {field!r}", line=lineno)
        if num < 0:
            raise InputDataError(f"negative count: {field!r}", line=lineno)
        values.append(int(num))
    if not values:
        raise InputDataError(f"{path} contains no counts")
    return np.asarray(values, dtype=np.int64)


def design_record(spec: ChartSpec, **extra) -> dict:
    rec = {
        "schema": SCHEMA,
        "kind": spec.kind.value,
        "weight": spec.weight.name if spec.weight is not None else None,
        "lambda": spec.lam,
        "mu0": spec.mu0,
        "L": spec.L if spec.kind is not ChartKind.CCHART else None,
    }
    if spec.kind is ChartKind.CCHART:
        rec["c_threshold"] = spec.c_threshold
    rec.update(extra)
    return rec


def spec_from_record(rec: dict) -> ChartSpec:
    """Rebuild a :class:`ChartSpec` from a JSON design record."""
    schema = rec.get("schema")
    if schema is not None and schema != SCHEMA:
        raise InputDataError(f"unsupported schema {schema!r}")
    try:
        kind = ChartKind.parse(rec["kind"])
        mu0 = float(rec["mu0"])
    except KeyError as exc:
        raise InputDataError(f"design record lacks {exc.args[0]!r}") from None
    if kind is ChartKind.CCHART:
        return ChartSpec(kind, mu0, c_threshold=rec.get("c_threshold"))
    weight = rec.get("weight")
    return ChartSpec(
        kind,
        mu0,
        lam=float(rec.get("lambda", 0.1)),
        weight=WeightFunction.parse(weight) if weight else None,
        L=float(rec["L"]),
    )


def load_design(path) -> ChartSpec:
    try:
        rec = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputDataError(f"cannot read design {path}: {exc}") from None
    return spec_from_record(rec)


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def write_trajectory(path, counts, result: MonitorResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "stat", "lcl", "ucl", "alarm"])
        for t, (x, s, a) in enumerate(zip(counts, result.stats, result.alarms), start=1):
            w.writerow([t, int(x), repr(float(s)), result.lcl, result.ucl, int(a)])


def write_table_csv(path, rows: list[dict]) -> None:
    if not rows:
        Path(path).write_text("")
        return
    keys = list(rows[0])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows(rows)


def render_svg(spec: ChartSpec, result: MonitorResult, width: int = 720, height: int = 240) -> str:
    """Static chart: statistic path, center line, limits, alarms, first alarm."""
    stats = np.asarray(result.stats, dtype=float)
    n = stats.size
    lo_lim = result.lcl if math.isfinite(result.lcl) else min(0.0, float(stats.min()))
    ys = [float(stats.min()), float(stats.max()), lo_lim, result.ucl]
    if spec.kind is not ChartKind.CCHART:
        ys.append(spec.center)
    ymin, ymax = min(ys), max(ys)
    pad = 0.05 * (ymax - ymin or 1.0)
    ymin, ymax = ymin - pad, ymax + pad
    m = 30

    def px(t):
        return m + (t - 1) * (width - 2 * m) / max(n - 1, 1)

    def py(v):
        return height - m - (v - ymin) * (height - 2 * m) / (ymax - ymin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{m}" y="16" font-size="12" font-family="sans-serif">{spec.describe()}</text>',
    ]

    def hline(v, dash, colour):
        parts.append(
            f'<line x1="{m}" x2="{width - m}" y1="{py(v):.2f}" y2="{py(v):.2f}" '
            f'stroke="{colour}" stroke-dasharray="{dash}"/>'
        )

    if spec.kind is not ChartKind.CCHART:
        hline(spec.center, "2,2", "grey")
        hline(result.lcl, "6,3", "black")
    hline(result.ucl, "6,3", "black")
    pts = " ".join(f"{px(t):.2f},{py(v):.2f}" for t, v in enumerate(stats, start=1))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1"/>')
    for t, (v, a) in enumerate(zip(stats, result.alarms), start=1):
        colour = "red" if a else "black"
        parts.append(f'<circle cx="{px(t):.2f}" cy="{py(v):.2f}" r="2" fill="{colour}"/>')
    if result.first_alarm is not None:
        x = px(result.first_alarm)
        parts.append(
            f'<line x1="{x:.2f}" x2="{x:.2f}" y1="{m}" y2="{height - m}" stroke="red" stroke-dasharray="1,3"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
