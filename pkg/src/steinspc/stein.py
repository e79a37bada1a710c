"""Stein weight functions and the truncated Poisson moments they induce.

For a weight ``f`` the Poisson(mu) identity reads
``E[X f(X)] = mu * E[f(X+1)]``.  Charts only ever need the two products
``x * f(x)`` and ``f(x + 1)``, so weights expose exactly those and never a
bare ``f(0)`` (which is undefined for the log weight).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .dist import CountModel
from .exceptions import ParameterError, TruncationError

DEFAULT_TAIL_TOL = 1e-10
PAPER_TRUNCATION = 50
MAX_TRUNCATION = 100_000


class WeightKind(str, enum.Enum):
    ONE = "one"
    ABS_LINEAR = "abslinear"
    ABS_ROOT = "absroot"
    LOG = "log"
    TABLE = "table"


_ALIASES = {
    "1": "one", "constant": "one", "constantone": "one", "const": "one",
    "|x-1|": "abslinear", "linear": "abslinear", "abs": "abslinear",
    "|x-1|^(1/4)": "absroot", "|x-1|^1/4": "absroot", "root": "absroot",
    "ln": "log", "ln(x)": "log", "logarithmic": "log",
}


@dataclass(frozen=True)
class WeightFunction:
    """Stein weight ``f`` on the nonnegative integers.

    ``values`` is only used for ``kind == TABLE``: it holds ``f(0..M)`` and
    lookups beyond ``M`` repeat ``f(M)``.
    """

    kind: WeightKind
    values: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", WeightKind(self.kind))
        if self.kind is WeightKind.TABLE:
            vals = tuple(float(v) for v in self.values)
            if len(vals) < 2:
                raise ParameterError("tabulated weight needs values on {0, ..., M} with M >= 1")
            if not all(math.isfinite(v) for v in vals):
                raise ParameterError("tabulated weight values must be finite")
            object.__setattr__(self, "values", vals)
        elif self.values:
            raise ParameterError("values are only allowed for tabulated weights")

    @classmethod
    def parse(cls, value: "WeightFunction | str | None") -> "WeightFunction":
        if isinstance(value, cls):
            return value
        if value is None:
            return cls(WeightKind.ONE)
        key = str(value).strip().lower().replace(" ", "")
        try:
            return cls(WeightKind(_ALIASES.get(key, key)))
        except ValueError:
            raise ParameterError(f"unknown weight function {value!r}") from None

    @classmethod
    def table(cls, values) -> "WeightFunction":
        return cls(WeightKind.TABLE, tuple(values))

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def label(self) -> str:
        return {
            WeightKind.ONE: "1",
            WeightKind.ABS_LINEAR: "|x-1|",
            WeightKind.ABS_ROOT: "|x-1|^(1/4)",
            WeightKind.LOG: "ln(x)",
            WeightKind.TABLE: "table",
        }[self.kind]

    def _lookup(self, x):
        idx = np.minimum(x, len(self.values) - 1)
        return np.asarray(self.values)[idx]

    def xf(self, x):
        """``x * f(x)`` for counts ``x >= 0``, with ``0 * ln 0 = 0``."""
        x = np.asarray(x)
        xd = x.astype(np.float64)
        kind = self.kind
        if kind is WeightKind.ONE:
            out = xd
        elif kind is WeightKind.ABS_LINEAR:
            out = xd * np.abs(xd - 1.0)
        elif kind is WeightKind.ABS_ROOT:
            out = xd * np.sqrt(np.sqrt(np.abs(xd - 1.0)))
        elif kind is WeightKind.LOG:
            out = xd * np.log(np.maximum(xd, 1.0))
        else:
            out = xd * self._lookup(x)
        return out if out.ndim else float(out)

    def f_shift(self, x):
        """``f(x + 1)`` for counts ``x >= 0``."""
        x = np.asarray(x)
        xd = x.astype(np.float64)
        kind = self.kind
        if kind is WeightKind.ONE:
            out = np.ones_like(xd)
        elif kind is WeightKind.ABS_LINEAR:
            out = xd
        elif kind is WeightKind.ABS_ROOT:
            out = np.sqrt(np.sqrt(xd))
        elif kind is WeightKind.LOG:
            out = np.log1p(xd)
        else:
            out = self._lookup(x + 1)
        return out if out.ndim else float(out)

    def __str__(self):
        return self.label


def xf(f: WeightFunction, x):
    return f.xf(x)


def f_shift(f: WeightFunction, x):
    return f.f_shift(x)


@dataclass(frozen=True)
class SteinMoments:
    """In-control moments ``m10 = E[X f(X)]`` and ``m01 = E[f(X+1)]``.

    ``truncation_M`` is ``None`` when a closed form was used.
    """

    m10: float
    m01: float
    mu0: float
    truncation_M: int | None


def truncation_point(model: CountModel, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """Smallest ``M`` with ``(M + 2)**2 * P(X > M) < tail_tol``.

    The quadratic factor bounds the neglected part of ``E[X f(X)]`` for
    weights growing at most linearly, and implies ``P(X > M) < tail_tol``.
    """
    if not tail_tol > 0:
        raise ParameterError(f"tail_tol must be positive, got {tail_tol}")
    lo = 0
    while lo <= MAX_TRUNCATION:
        m = np.arange(lo, min(lo + 512, MAX_TRUNCATION + 1))
        ok = (m + 2.0) ** 2 * model.sf(m) < tail_tol
        if ok.any():
            return int(m[np.argmax(ok)])
        lo += 512
    raise TruncationError(
        f"tail tolerance {tail_tol:g} not reached for {model} within M={MAX_TRUNCATION}"
    )


def _truncated_sums(f: WeightFunction, model: CountModel, M: int) -> tuple[float, float]:
    x = np.arange(M + 1)
    p = model.pmf(x)
    return math.fsum(f.xf(x) * p), math.fsum(f.f_shift(x) * p)


def stein_moments_poisson(
    f: WeightFunction,
    mu0: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
    truncation: int | None = None,
    closed_form: bool = True,
) -> SteinMoments:
    """Moments of ``f`` under Poisson(mu0) by truncated summation.

    ``truncation`` fixes ``M`` (``PAPER_TRUNCATION`` reproduces the
    published designs); otherwise ``M`` adapts to ``tail_tol``.  Weights
    with known closed forms (``1`` and ``|x-1|``) skip summation unless
    ``closed_form`` is false or a fixed ``truncation`` is requested.
    """
    f = WeightFunction.parse(f)
    mu0 = float(mu0)
    if not mu0 > 0:
        raise ParameterError(f"mu0 must be positive, got {mu0}")
    if truncation is None and closed_form:
        if f.kind is WeightKind.ONE:
            return SteinMoments(mu0, 1.0, mu0, None)
        if f.kind is WeightKind.ABS_LINEAR:
            # x|x-1| = x(x-1) on the integers
            return SteinMoments(mu0 * mu0, mu0, mu0, None)
    if truncation is None:
        M = truncation_point(CountModel.poisson(mu0), tail_tol)
    else:
        M = int(truncation)
        if M < 1:
            raise ParameterError(f"truncation must be >= 1, got {truncation}")
    m10, m01 = _truncated_sums(f, CountModel.poisson(mu0), M)
    return SteinMoments(m10, m01, mu0, M)


def stein_residual(
    f: WeightFunction, model: CountModel, tail_tol: float = DEFAULT_TAIL_TOL
) -> float:
    """``E[X f(X)] - mu * E[f(X+1)]`` under ``model``; zero iff Poisson."""
    f = WeightFunction.parse(f)
    M = truncation_point(model, tail_tol)
    m10, m01 = _truncated_sums(f, model, M)
    return m10 - model.mu * m01

