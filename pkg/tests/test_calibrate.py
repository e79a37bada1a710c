import math

import pytest

from steinspc import PAPER_DESIGNS, ChartSpec, CountModel, c_chart_arl, c_chart_design, find_L, zero_state_arl
from steinspc.calibrate import default_bracket
from steinspc.exceptions import BracketError, CalibrationError, ParameterError


def poisson_tail(mu, k):
    # P(X >= k) by direct summation of the complementary finite sum
    return 1.0 - math.fsum(math.exp(-mu) * mu**j / math.factorial(j) for j in range(k))


@pytest.mark.parametrize("mu0,k", [(1.48, 6), (2.0, 7), (5.0, 12), (0.5, 1)])
def test_c_chart_arl_oracle(mu0, k):
    assert c_chart_arl(mu0, k) == pytest.approx(1 / poisson_tail(mu0, k), rel=1e-10)


def test_c_chart_design_examples():
    d = c_chart_design(1.48, 370)
    assert d.threshold == 6
    assert d.achieved_arl == pytest.approx(239.2, abs=0.05)
    assert d.below[0] == 6 and d.above[0] == 7
    assert d.above[1] == pytest.approx(1 / poisson_tail(1.48, 7), rel=1e-10)
    assert c_chart_design(2.0).threshold == 7


def test_c_chart_design_picks_closest():
    for mu0 in (0.7, 1.48, 2.0, 3.3, 5.0, 8.0):
        d = c_chart_design(mu0, 370)
        arls = {k: c_chart_arl(mu0, k) for k in range(1, 40)}
        best = min(arls, key=lambda k: abs(arls[k] - 370))
        assert d.threshold == best


def test_c_chart_design_forced_k1():
    d = c_chart_design(2.0, 1.0)
    assert d.threshold == 1
    assert d.achieved_arl == pytest.approx(1 / (1 - math.exp(-2.0)))


def test_c_chart_bad_mean():
    with pytest.raises(ParameterError):
        c_chart_design(0.0)
    with pytest.raises(ParameterError):
        c_chart_arl(-1.0, 3)


def test_default_bracket():
    lo, hi = default_bracket(ChartSpec("ewma", 4.0, 0.1))
    assert lo == 0.0
    assert hi == pytest.approx(15 * math.sqrt(0.1 / 1.9) * 2.0)


def test_find_L_reproducible_and_on_target():
    spec = ChartSpec("ewma", 2.0, 0.1)
    a = find_L(spec, target_arl=100, reps=3000, seed=12)
    b = find_L(spec, target_arl=100, reps=3000, seed=12)
    assert a.L == b.L and a.achieved_arl == b.achieved_arl
    assert abs(a.achieved_arl - 100) < 3.0
    lo, hi = a.bracket
    assert lo <= a.L <= hi
    check = zero_state_arl(spec.with_L(a.L), CountModel.poisson(2.0), reps=3000, seed=12)
    assert check.mean == a.achieved_arl


def test_find_L_stein_chart():
    spec = ChartSpec("abc", 2.0, 0.1, "abslinear")
    cal = find_L(spec, target_arl=60, reps=2000, seed=3)
    assert abs(cal.achieved_arl - 60) < 2.0
    assert 0 < cal.L < 0.463  # below the 370 design


def test_find_L_errors():
    spec = ChartSpec("ewma", 2.0, 0.1)
    with pytest.raises(BracketError):
        find_L(spec, target_arl=370, reps=200, seed=1, bracket=(0.0, 0.05))
    with pytest.raises(BracketError):
        find_L(spec, reps=200, bracket=(1.0, 0.5))
    with pytest.raises(ParameterError):
        find_L(ChartSpec("c", 2.0, c_threshold=7))
    with pytest.raises(CalibrationError) as info:
        find_L(spec, target_arl=100, reps=500, seed=1, rel_tol=0.0, max_iter=2)
    assert info.value.best is not None


def test_paper_designs_table():
    assert len(PAPER_DESIGNS) == 21
    for (kind, weight, mu0), L in PAPER_DESIGNS.items():
        spec = ChartSpec(kind, mu0, 0.1, weight, L=L)
        assert spec.L == L and L > 0
