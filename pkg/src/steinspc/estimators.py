"""scikit-learn style wrappers.

``fit`` performs the Phase-I step (estimate the in-control mean, design
the limits), ``transform`` returns the plotted statistics for Phase-II
data and ``predict`` the alarm flags.
"""

from __future__ import annotations

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._random import resolve_seed
from ._validation import check_counts
from .calibrate import c_chart_design, find_L
from .charts import ChartKind, ChartSpec, monitor
from .exceptions import SpecError
from .phase1 import fit_zip_ml, phase1_report
from .simrl import DEFAULT_TARGET_ARL


class CountControlChart(TransformerMixin, BaseEstimator):
    """EWMA, AB-EWMA, ABC-EWMA or c-chart for Poisson counts.

    Parameters
    ----------
    chart : {"ewma", "ab", "abc", "c"}
    weight : str or WeightFunction, optional
        Stein weight for the AB/ABC charts.
    lam : float
        Smoothing parameter.
    mu0 : float, optional
        In-control mean; estimated from the Phase-I sample when omitted.
    L : float, optional
        Limit half-width; calibrated by simulation when omitted.
    target_arl : float
        In-control ARL aimed at when calibrating.
    n_reps, random_state, n_jobs
        Monte Carlo settings for calibration.
    """

    def __init__(
        self,
        chart="abc",
        weight="abslinear",
        lam=0.1,
        mu0=None,
        L=None,
        target_arl=DEFAULT_TARGET_ARL,
        n_reps=10_000,
        random_state=None,
        n_jobs=1,
    ):
        self.chart = chart
        self.weight = weight
        self.lam = lam
        self.mu0 = mu0
        self.L = L
        self.target_arl = target_arl
        self.n_reps = n_reps
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        x = check_counts(X, name="X")
        mu0 = float(x.mean()) if self.mu0 is None else float(self.mu0)
        if mu0 <= 0:
            raise SpecError("in-control mean must be positive; Phase-I data are all zero")
        kind = ChartKind.parse(self.chart)
        self.mu0_ = mu0
        self.n_phase1_ = x.size
        if kind is ChartKind.CCHART:
            design = c_chart_design(mu0, self.target_arl)
            self.spec_ = ChartSpec(kind, mu0, c_threshold=design.threshold)
            self.arl0_ = design.achieved_arl
            return self
        weight = self.weight if kind in (ChartKind.AB, ChartKind.ABC) else None
        spec = ChartSpec(kind, mu0, self.lam, weight)
        if self.L is None:
            cal = find_L(
                spec,
                target_arl=self.target_arl,
                reps=self.n_reps,
                seed=resolve_seed(self.random_state),
                n_jobs=self.n_jobs,
            )
            self.spec_ = spec.with_L(cal.L)
            self.arl0_ = cal.achieved_arl
        else:
            self.spec_ = spec.with_L(self.L)
            self.arl0_ = None
        return self

    def transform(self, X):
        """Plotted statistics as an ``(n, 1)`` array."""
        check_is_fitted(self, "spec_")
        x = check_counts(X, name="X")
        return monitor(self.spec_, x).stats.reshape(-1, 1)

    def predict(self, X):
        """1 where the statistic violates the limits, else 0."""
        check_is_fitted(self, "spec_")
        x = check_counts(X, name="X")
        return monitor(self.spec_, x).alarms.astype(np.int64)

    def first_alarm(self, X):
        """1-based time of the first alarm, or ``None``."""
        check_is_fitted(self, "spec_")
        return monitor(self.spec_, check_counts(X, name="X")).first_alarm

    @property
    def limits_(self):
        check_is_fitted(self, "spec_")
        return self.spec_.lcl, self.spec_.ucl


class Phase1Diagnostics(BaseEstimator):
    """Phase-I summary as a fitted estimator (``report_`` holds everything)."""

    def __init__(self, max_lag=None, alpha=0.01):
        self.max_lag = max_lag
        self.alpha = alpha

    def fit(self, X, y=None):
        self.report_ = phase1_report(check_counts(X, min_length=2, name="X"), self.max_lag)
        self.mean_ = self.report_.mean
        self.disp_ = self.report_.disp_hat
        self.pvalue_ = self.report_.disp_pvalue
        self.overdispersed_ = self.report_.overdispersed(self.alpha)
        return self


class ZeroInflatedPoisson(BaseEstimator):
    """ZIP maximum-likelihood fit; ``omega_``, ``lam_`` and ``loglik_`` after ``fit``."""

    def __init__(self, tol=1e-10, max_iter=100_000):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        res = fit_zip_ml(check_counts(X, min_length=2, name="X"), self.tol, self.max_iter)
        self.omega_, self.lam_, self.loglik_, self.n_iter_ = res.omega, res.lam, res.loglik, res.n_iter
        return self

    def predict_proba(self, x):
        """PMF of the fitted model at counts ``x``."""
        check_is_fitted(self, "omega_")
        x = np.asarray(x)
        return self.omega_ * (x == 0) + (1 - self.omega_) * stats.poisson.pmf(x, self.lam_)
