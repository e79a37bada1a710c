"""Stein-Chen EWMA control charts for Poisson counts."""

from .calibrate import PAPER_DESIGNS, c_chart_arl, c_chart_design, find_L
from .charts import ChartKind, ChartSpec, ChartState, Signal, check, init, monitor, monitor_series, update
from .dist import CountModel, Family, nb_params, zip_params
from .estimators import CountControlChart, Phase1Diagnostics, ZeroInflatedPoisson
from .phase1 import acf, dispersion_test, fit_poisson, fit_zip_ml, phase1_report
from .simrl import ChangeScenario, RunLengthStats, ced, table, zero_state_arl
from .stein import WeightFunction, WeightKind, stein_moments_poisson, stein_residual

__version__ = "0.1.0"

__all__ = [
    "PAPER_DESIGNS", "c_chart_arl", "c_chart_design", "find_L",
    "ChartKind", "ChartSpec", "ChartState", "Signal", "check", "init", "monitor", "monitor_series", "update",
    "CountModel", "Family", "nb_params", "zip_params",
    "CountControlChart", "Phase1Diagnostics", "ZeroInflatedPoisson",
    "acf", "dispersion_test", "fit_poisson", "fit_zip_ml", "phase1_report",
    "ChangeScenario", "RunLengthStats", "ced", "table", "zero_state_arl",
    "WeightFunction", "WeightKind", "stein_moments_poisson", "stein_residual",
]
