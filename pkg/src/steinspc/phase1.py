"""Phase-I diagnostics for count data.

Estimates the Poisson mean, tests for overdispersion with the dispersion
index, screens for autocorrelation and fits a zero-inflated Poisson model
by EM.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special

from ._validation import check_counts
from .exceptions import DegenerateDataError, EstimationError


def chi2_sf(x: float, df: float) -> float:
    """Upper tail P(chi2_df >= x) as a regularized upper incomplete gamma."""
    if x <= 0:
        return 1.0
    return float(special.gammaincc(0.5 * df, 0.5 * x))


def fit_poisson(data) -> float:
    """Poisson ML estimate, i.e. the sample mean."""
    x = check_counts(data)
    return float(x.mean())


def dispersion_pvalue(disp_hat: float, t0: int) -> float:
    """One-sided p-value of ``H0: I = 1`` against ``I > 1``."""
    if t0 < 2:
        raise DegenerateDataError("dispersion test needs at least two observations")
    return chi2_sf((t0 - 1) * disp_hat, t0 - 1)


def dispersion_test(data) -> tuple[float, float]:
    """Sample dispersion index ``S^2 / mean`` (divisor T0-1) and its p-value.

    Under a Poisson null ``(T0 - 1) * I_hat`` is approximately chi-square
    with ``T0 - 1`` degrees of freedom.
    """
    x = check_counts(data, min_length=2)
    mean = x.mean()
    if mean <= 0:
        raise DegenerateDataError("dispersion index undefined for all-zero data")
    disp = float(x.var(ddof=1) / mean)
    return disp, dispersion_pvalue(disp, x.size)


@dataclass(frozen=True)
class AcfLag:
    lag: int
    value: float
    bound: float

    @property
    def significant(self) -> bool:
        return abs(self.value) > self.bound


def acf(data, max_lag: int = 10) -> list[AcfLag]:
    """Sample autocorrelations with the white-noise band ``+/- 1.96 / sqrt(T0)``."""
    x = check_counts(data).astype(np.float64)
    n = x.size
    if not 1 <= max_lag < n:
        raise ValueError(f"max_lag must lie in [1, {n - 1}], got {max_lag}")
    d = x - x.mean()
    denom = float(d @ d)
    if denom == 0.0:
        raise DegenerateDataError("autocorrelation undefined for a constant series")
    bound = 1.96 / math.sqrt(n)
    return [AcfLag(k, float(d[:-k] @ d[k:]) / denom, bound) for k in range(1, max_lag + 1)]


def zip_loglik(data, omega: float, lam: float) -> float:
    x = check_counts(data)
    n0 = int((x == 0).sum())
    pos = x[x > 0]
    ll = pos.size * math.log1p(-omega) if omega < 1 else (-math.inf if pos.size else 0.0)
    ll += float((-lam + pos * math.log(lam) - special.gammaln(pos + 1.0)).sum())
    if n0:
        ll += n0 * math.log(omega + (1.0 - omega) * math.exp(-lam))
    return ll


@dataclass(frozen=True)
class ZipFit:
    omega: float
    lam: float
    loglik: float
    n_iter: int
    history: tuple[float, ...] = field(default=(), repr=False)


def fit_zip_ml(data, tol: float = 1e-10, max_iter: int = 100_000) -> ZipFit:
    """Maximum-likelihood ZIP fit by EM.

    When the observed zero share does not exceed ``exp(-mean)`` the
    likelihood is maximised on the boundary ``omega = 0`` and the Poisson
    estimate is returned directly.
    """
    x = check_counts(data, min_length=2)
    n = x.size
    n0 = int((x == 0).sum())
    total = float(x.sum())
    if total == 0:
        raise DegenerateDataError("ZIP fit undefined for all-zero data")
    mean = total / n
    if n0 / n <= math.exp(-mean):
        return ZipFit(0.0, mean, zip_loglik(x, 0.0, mean), 0, ())

    # excess-zero moment start
    p0 = math.exp(-mean)
    omega = (n0 / n - p0) / (1.0 - p0)
    lam = mean / (1.0 - omega)
    ll = zip_loglik(x, omega, lam)
    history = [ll]
    for it in range(1, max_iter + 1):
        share = omega / (omega + (1.0 - omega) * math.exp(-lam))
        structural = n0 * share
        omega = structural / n
        lam = total / (n - structural)
        new = zip_loglik(x, omega, lam)
        history.append(new)
        if abs(new - ll) < tol:
            return ZipFit(omega, lam, new, it, tuple(history))
        ll = new
    raise EstimationError(f"ZIP EM did not converge in {max_iter} iterations")


@dataclass(frozen=True)
class Phase1Report:
    t0: int
    mean: float
    disp_hat: float
    disp_pvalue: float
    acf: list[AcfLag]
    zip_fit: ZipFit | None

    def overdispersed(self, alpha: float = 0.01) -> bool:
        return self.disp_pvalue < alpha

    def to_dict(self) -> dict:
        d = asdict(self)
        d["acf"] = [dict(asdict(a), significant=a.significant) for a in self.acf]
        if self.zip_fit is not None:
            d["zip_fit"] = {
                "omega_hat": self.zip_fit.omega,
                "lam_hat": self.zip_fit.lam,
                "loglik": self.zip_fit.loglik,
                "n_iter": self.zip_fit.n_iter,
            }
        return d


def phase1_report(data, max_lag: int | None = None) -> Phase1Report:
    """Bundle every Phase-I diagnostic for ``data``."""
    x = check_counts(data, min_length=2)
    if max_lag is None:
        max_lag = min(10, x.size - 1)
    disp, p = dispersion_test(x)
    try:
        lags = acf(x, max_lag)
    except DegenerateDataError:
        lags = []
    return Phase1Report(x.size, float(x.mean()), disp, p, lags, fit_zip_ml(x))
