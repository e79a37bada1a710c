"""Streaming control charts for Poisson counts.

Four chart kinds share one recursion kernel, :func:`advance`, which works on
floats and on numpy arrays alike.  The Monte Carlo engine calls it on whole
vectors of replications; :func:`update` calls it on a single state.  Both
therefore produce bit-identical statistics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .exceptions import SpecError
from .stein import DEFAULT_TAIL_TOL, SteinMoments, WeightFunction, stein_moments_poisson


class ChartKind(str, enum.Enum):
    CCHART = "c"
    EWMA = "ewma"
    AB = "ab"
    ABC = "abc"

    @classmethod
    def parse(cls, value: "ChartKind | str") -> "ChartKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        key = {"cchart": "c", "abewma": "ab", "abcewma": "abc"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise SpecError(f"unknown chart kind {value!r}") from None


class Signal(str, enum.Enum):
    IN_CONTROL = "in_control"
    ALARM = "alarm"


@dataclass(frozen=True)
class ChartSpec:
    """Immutable chart design.

    Limits are ``mu0 -/+ L`` for EWMA and AB-EWMA, ``1 -/+ L`` for ABC-EWMA.
    The c-chart is one-sided and alarms on ``x >= c_threshold``.
    """

    kind: ChartKind
    mu0: float
    lam: float = 0.1
    weight: WeightFunction | None = None
    L: float = 0.0
    c_threshold: int | None = None
    tail_tol: float = DEFAULT_TAIL_TOL
    truncation: int | None = field(default=None, repr=False)

    def __post_init__(self):
        kind = ChartKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "mu0", float(self.mu0))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "L", float(self.L))
        if not (math.isfinite(self.mu0) and self.mu0 > 0):
            raise SpecError(f"in-control mean must be positive, got {self.mu0}")
        if kind is ChartKind.CCHART:
            if self.c_threshold is None or int(self.c_threshold) < 0:
                raise SpecError("c-chart needs a nonnegative c_threshold")
            object.__setattr__(self, "c_threshold", int(self.c_threshold))
            object.__setattr__(self, "lam", 1.0)
            object.__setattr__(self, "weight", None)
            return
        if not 0.0 < self.lam <= 1.0:
            raise SpecError(f"lambda must lie in (0, 1], got {self.lam}")
        if not (math.isfinite(self.L) and self.L >= 0):
            raise SpecError(f"limit half-width must be nonnegative, got {self.L}")
        if kind is ChartKind.EWMA:
            object.__setattr__(self, "weight", None)
            return
        object.__setattr__(self, "weight", WeightFunction.parse(self.weight))
        if self.lam >= 1.0:
            raise SpecError("AB/ABC-EWMA need lambda < 1 to keep B_t > 0")

    @cached_property
    def moments(self) -> SteinMoments | None:
        if self.kind not in (ChartKind.AB, ChartKind.ABC):
            return None
        m = stein_moments_poisson(self.weight, self.mu0, self.tail_tol, self.truncation)
        if not m.m01 > 0:
            raise SpecError(f"weight {self.weight} gives E[f(X+1)] = {m.m01}; B_t would vanish")
        return m

    @property
    def center(self) -> float:
        return 1.0 if self.kind is ChartKind.ABC else self.mu0

    @property
    def lcl(self) -> float:
        if self.kind is ChartKind.CCHART:
            return -math.inf
        return self.center - self.L

    @property
    def ucl(self) -> float:
        if self.kind is ChartKind.CCHART:
            return float(self.c_threshold)
        return self.center + self.L

    def with_L(self, L: float) -> "ChartSpec":
        return replace(self, L=L)

    def describe(self) -> str:
        if self.kind is ChartKind.CCHART:
            return f"c-chart(x >= {self.c_threshold})"
        name = {ChartKind.EWMA: "EWMA", ChartKind.AB: "AB-EWMA", ChartKind.ABC: "ABC-EWMA"}[self.kind]
        w = f", f={self.weight.label}" if self.weight is not None else ""
        return f"{name}(mu0={self.mu0:g}, lambda={self.lam:g}{w}, L={self.L:g})"


@dataclass(frozen=True)
class ChartState:
    """Accumulators after ``t`` observations.

    ``a``/``b``/``c`` hold A_t, B_t, C_t; the ordinary EWMA keeps its
    statistic in ``a``.
    """

    t: int
    stat: float
    a: float = math.nan
    b: float = math.nan
    c: float = math.nan
    alarmed: bool = False

    @property
    def z(self) -> float:
        return self.stat


def initial_accumulators(spec: ChartSpec) -> tuple[float, float, float, float]:
    """``(a, b, c, stat)`` before the first observation."""
    kind = spec.kind
    if kind is ChartKind.CCHART:
        return math.nan, math.nan, math.nan, 0.0
    if kind is ChartKind.EWMA:
        return spec.mu0, math.nan, math.nan, spec.mu0
    m = spec.moments
    if kind is ChartKind.AB:
        return m.m10, m.m01, math.nan, spec.mu0
    return m.m10, m.m01, spec.mu0, 1.0


def advance(spec: ChartSpec, a, b, c, x):
    """One recursion step; returns ``(a, b, c, stat)``.

    Works elementwise on arrays.  ``x`` must be nonnegative integer counts.
    """
    kind = spec.kind
    if kind is ChartKind.CCHART:
        return a, b, c, np.asarray(x, dtype=np.float64)
    lam = spec.lam
    keep = 1.0 - lam
    if kind is ChartKind.EWMA:
        a = lam * x + keep * a
        return a, b, c, a
    w = spec.weight
    a = lam * w.xf(x) + keep * a
    b = lam * w.f_shift(x) + keep * b
    if kind is ChartKind.AB:
        return a, b, c, a / b
    c = lam * x + keep * c
    return a, b, c, a / (b * c)


def violates(spec: ChartSpec, stat):
    """Alarm mask; on-limit values are in control (strict inequalities)."""
    if spec.kind is ChartKind.CCHART:
        return stat >= spec.c_threshold
    return (stat < spec.center - spec.L) | (stat > spec.center + spec.L)


def init(spec: ChartSpec) -> ChartState:
    a, b, c, stat = initial_accumulators(spec)
    return ChartState(t=0, stat=stat, a=a, b=b, c=c, alarmed=False)


def check(spec: ChartSpec, stat: float) -> Signal:
    return Signal.ALARM if bool(violates(spec, stat)) else Signal.IN_CONTROL


def update(state: ChartState, spec: ChartSpec, x: int) -> tuple[ChartState, float]:
    """Feed one count; the ``alarmed`` flag latches once set."""
    if x < 0:
        raise ValueError(f"counts must be nonnegative, got {x}")
    a, b, c, stat = advance(spec, state.a, state.b, state.c, np.int64(x))
    stat = float(stat)
    alarmed = state.alarmed or bool(violates(spec, stat))
    new = ChartState(t=state.t + 1, stat=stat, a=float(a), b=float(b), c=float(c), alarmed=alarmed)
    return new, stat


@dataclass(frozen=True)
class MonitorResult:
    first_alarm: int | None
    stats: np.ndarray = field(repr=False)
    alarms: np.ndarray = field(repr=False)
    lcl: float
    ucl: float

    @property
    def n_alarms(self) -> int:
        return int(self.alarms.sum())


def monitor(spec: ChartSpec, series) -> MonitorResult:
    """Run the chart over ``series`` (past alarms too) and collect everything."""
    x = np.asarray(series, dtype=np.int64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("series must be a non-empty 1-D sequence of counts")
    if (x < 0).any():
        raise ValueError("counts must be nonnegative")
    a, b, c, _ = initial_accumulators(spec)
    stats = np.empty(x.size)
    for i, xi in enumerate(x):
        a, b, c, s = advance(spec, a, b, c, xi)
        stats[i] = s
    alarms = np.asarray(violates(spec, stats), dtype=bool)
    first = int(np.argmax(alarms)) + 1 if alarms.any() else None
    return MonitorResult(first, stats, alarms, spec.lcl, spec.ucl)


def monitor_series(spec: ChartSpec, series) -> tuple[int | None, np.ndarray]:
    """1-based index of the first alarm (``None`` if none) and all statistics."""
    res = monitor(spec, series)
    return res.first_alarm, res.stats
