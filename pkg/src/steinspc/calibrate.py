"""Control-limit design: simulated bisection for EWMA-type charts and the
analytic threshold choice for the c-chart.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .charts import ChartKind, ChartSpec
from .dist import CountModel
from .exceptions import BracketError, CalibrationError, ParameterError
from .simrl import DEFAULT_MAX_T, DEFAULT_TARGET_ARL, ChangeScenario, RunLengthStats, run_lengths, zero_state_arl

log = logging.getLogger(__name__)

# Published designs for lambda = 0.1: (kind, weight, mu0) -> L
PAPER_DESIGNS = {
    ("ewma", None, 2.0): 0.877,
    ("ab", "abslinear", 2.0): 1.191,
    ("abc", "abslinear", 2.0): 0.463,
    ("ewma", None, 5.0): 1.388,
    ("ab", "abslinear", 5.0): 1.614,
    ("abc", "abslinear", 5.0): 0.1828,
    ("ab", "absroot", 2.0): 1.053,
    ("abc", "absroot", 2.0): 0.382,
    ("ab", "absroot", 5.0): 1.424,
    ("abc", "absroot", 5.0): 0.106,
    ("ab", "log", 2.0): 1.089,
    ("abc", "log", 2.0): 0.396,
    ("ab", "log", 5.0): 1.465,
    ("abc", "log", 5.0): 0.118,
    ("ewma", None, 1.48): 0.758,
    ("ab", "abslinear", 1.48): 1.099,
    ("ab", "absroot", 1.48): 0.986,
    ("ab", "log", 1.48): 1.017,
    ("abc", "abslinear", 1.48): 0.638,
    ("abc", "absroot", 1.48): 0.574,
    ("abc", "log", 1.48): 0.581,
}


@dataclass(frozen=True)
class Calibration:
    L: float
    achieved_arl: float
    se: float
    bracket: tuple[float, float]
    bracket_arl: tuple[float, float]
    iterations: int
    stats: RunLengthStats


def default_bracket(spec: ChartSpec) -> tuple[float, float]:
    """``(0, 5 * 3 sigma_EWMA)`` with the asymptotic EWMA standard deviation."""
    return 0.0, 15.0 * math.sqrt(spec.lam / (2.0 - spec.lam)) * math.sqrt(spec.mu0)


class _CappedARL:
    """Simulated ARL(L) under common random numbers, with early stopping.

    Runs are first simulated up to ``cap`` steps.  If the truncated mean
    already exceeds the target the ARL is known to exceed it as well; the
    exact value is computed (up to ``max_t``) only when it matters.
    """

    def __init__(self, spec, model, target, reps, seed, max_t, n_jobs, cap_factor=4.0):
        self.spec, self.target, self.reps, self.seed = spec, target, reps, seed
        self.scenario = ChangeScenario(model, model, 1)
        self.max_t, self.n_jobs = max_t, n_jobs
        self.cap = int(min(max_t, max(1000, cap_factor * target)))
        self.evaluations = 0

    def __call__(self, L: float) -> tuple[float, bool]:
        """Return ``(arl, is_exact)``; a non-exact value is a lower bound above target."""
        self.evaluations += 1
        spec = self.spec.with_L(L)
        rl = run_lengths(spec, self.scenario, self.seed, self.reps, self.cap, 0, self.n_jobs)
        censored = rl > self.cap
        lower = float(np.minimum(rl, self.cap).mean())
        if not censored.any():
            return lower, True
        if lower > self.target:
            return lower, False
        rl = run_lengths(spec, self.scenario, self.seed, self.reps, self.max_t, 0, self.n_jobs)
        return float(np.minimum(rl, self.max_t).mean()), True


def find_L(
    spec: ChartSpec,
    model0: CountModel | None = None,
    target_arl: float = DEFAULT_TARGET_ARL,
    reps: int = 10_000,
    seed: int = 0,
    bracket: tuple[float, float] | None = None,
    rel_tol: float = 0.01,
    max_t: int | None = None,
    n_jobs: int = 1,
    max_iter: int = 60,
) -> Calibration:
    """Half-width ``L`` whose zero-state in-control ARL is close to ``target_arl``.

    All trial values of ``L`` reuse the same replications, which makes the
    simulated ARL a nondecreasing step function of ``L``; plain bisection
    then converges deterministically for a given seed.
    """
    if spec.kind is ChartKind.CCHART:
        raise ParameterError("use c_chart_design for the c-chart")
    if model0 is None:
        model0 = CountModel.poisson(spec.mu0)
    if max_t is None:
        max_t = max(DEFAULT_MAX_T, int(100 * target_arl))
    arl = _CappedARL(spec, model0, target_arl, reps, seed, max_t, n_jobs)

    auto = bracket is None
    lo, hi = default_bracket(spec) if auto else (float(bracket[0]), float(bracket[1]))
    if not 0 <= lo < hi:
        raise BracketError(f"invalid bracket ({lo}, {hi})")
    arl_lo, _ = arl(lo)
    arl_hi, hi_exact = arl(hi)
    if auto:
        while arl_lo >= target_arl and lo > 0:
            lo = 0.0
            arl_lo, _ = arl(lo)
        for _ in range(10):
            if arl_hi > target_arl:
                break
            lo, arl_lo = hi, arl_hi
            hi *= 2.0
            arl_hi, hi_exact = arl(hi)
    if not (arl_lo < target_arl < arl_hi):
        raise BracketError(
            f"ARL({lo:g}) = {arl_lo:.1f} and ARL({hi:g}) = {arl_hi:.1f} do not bracket {target_arl:g}"
        )

    for it in range(1, max_iter + 1):
        if hi_exact and (arl_hi - arl_lo) <= rel_tol * target_arl or hi - lo < 1e-4:
            mid = 0.5 * (lo + hi)
            res = zero_state_arl(spec.with_L(mid), model0, reps, seed, max_t, 0, n_jobs)
            log.info("calibrated L=%.6g ARL=%.2f after %d iterations", mid, res.mean, it)
            return Calibration(mid, res.mean, res.se, (lo, hi), (arl_lo, arl_hi), it, res)
        mid = 0.5 * (lo + hi)
        value, exact = arl(mid)
        log.debug("L=%.6g ARL%s%.2f", mid, "=" if exact else ">=", value)
        if value < target_arl:
            lo, arl_lo = mid, value
        else:
            hi, arl_hi, hi_exact = mid, value, exact
    best = 0.5 * (lo + hi)
    raise CalibrationError(f"no convergence after {max_iter} iterations; best L={best:g}", best=best)


def c_chart_arl(mu0: float, threshold: int) -> float:
    """In-control ARL ``1 / P(X >= threshold)`` of the c-chart under Poisson(mu0)."""
    if not mu0 > 0:
        raise ParameterError(f"mu0 must be positive, got {mu0}")
    p = float(stats.poisson.sf(int(threshold) - 1, mu0))
    return math.inf if p == 0.0 else 1.0 / p


@dataclass(frozen=True)
class CChartDesign:
    threshold: int
    achieved_arl: float
    below: tuple[int, float]
    above: tuple[int, float]


def c_chart_design(mu0: float, target_arl: float = DEFAULT_TARGET_ARL) -> CChartDesign:
    """Threshold whose ARL is closest to the target.

    The discrete ARLs rarely hit the target, so the neighbours on either
    side (``below``: largest threshold with ARL <= target, ``above``: the
    next one) are reported too.
    """
    if not mu0 > 0:
        raise ParameterError(f"mu0 must be positive, got {mu0}")
    k = 1
    while c_chart_arl(mu0, k + 1) <= target_arl:
        k += 1
    below = (k, c_chart_arl(mu0, k))
    above = (k + 1, c_chart_arl(mu0, k + 1))
    if below[1] > target_arl:
        # even k = 1 exceeds the target
        return CChartDesign(1, below[1], below, below)
    pick = below if target_arl - below[1] <= above[1] - target_arl else above
    return CChartDesign(pick[0], pick[1], below, above)
