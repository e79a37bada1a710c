"""Grids laid out like the published ARL / CED(100) tables."""

from __future__ import annotations

from .calibrate import PAPER_DESIGNS
from .charts import ChartSpec
from .dist import CountModel, Family
from .simrl import ChangeScenario, CellResult

SHIFTS = (-0.25, 0.0, 0.25)
FAMILIES = (Family.ZIP, Family.POISSON, Family.NEGBIN)
OUT_DISP = 5 / 3
DESIGN_ORDER = (
    ("ewma", None),
    ("ab", "abslinear"),
    ("abc", "abslinear"),
    ("ab", "absroot"),
    ("abc", "absroot"),
    ("ab", "log"),
    ("abc", "log"),
)


def out_model(family: Family, mu: float, disp: float = OUT_DISP) -> CountModel:
    if family is Family.POISSON:
        return CountModel.poisson(mu)
    return CountModel(family, mu, disp)


def paper_grid(which: int = 1, mu0s=(2.0, 5.0), tau: int = 100, lam: float = 0.1, designs=None):
    """``(spec, scenario, label)`` cells; ``which=1`` zero-state, ``which=2`` CED(tau).

    ``designs`` maps ``(kind, weight, mu0)`` to ``L`` and defaults to the
    published values.
    """
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    designs = PAPER_DESIGNS if designs is None else designs
    grid = []
    for mu0 in mu0s:
        mu0 = float(mu0)
        for kind, weight in DESIGN_ORDER:
            L = designs.get((kind, weight, mu0))
            if L is None:
                continue
            spec = ChartSpec(kind, mu0, lam, weight, L=L)
            for family in FAMILIES:
                for shift in SHIFTS:
                    mu = mu0 + shift
                    out = out_model(family, mu)
                    if which == 1:
                        scenario = ChangeScenario(out, out, 1)
                    else:
                        scenario = ChangeScenario(CountModel.poisson(mu0), out, tau)
                    label = {
                        "mu0": mu0,
                        "chart": kind,
                        "weight": weight or "",
                        "L": L,
                        "family": family.value,
                        "mu": mu,
                        "disp": out.disp,
                        "tau": scenario.tau,
                    }
                    grid.append((spec, scenario, label))
    return grid


def rows(cells: list[CellResult]) -> list[dict]:
    """Flatten evaluated cells to CSV/JSON-ready dicts."""
    out = []
    for cell in cells:
        row = dict(cell.label)
        st = cell.stats
        row.update(
            value=st.mean if st else None,
            se=st.se if st else None,
            reps_used=st.reps_used if st else None,
            reps_discarded=st.reps_discarded if st else None,
            reps_censored=st.reps_censored if st else None,
            error=cell.error or "",
        )
        out.append(row)
    return out


def format_blocks(table_rows: list[dict]) -> str:
    """Plain-text rendering, one 3x3 block per design."""
    lines = []
    seen = []
    for r in table_rows:
        key = (r["mu0"], r["chart"], r["weight"], r["L"])
        if key not in seen:
            seen.append(key)
    for mu0, chart, weight, L in seen:
        head = f"mu0={mu0:g}  {chart.upper()}{' ' + weight if weight else ''}  L={L:g}"
        lines.append(head)
        for fam in FAMILIES:
            vals = []
            for r in table_rows:
                if (r["mu0"], r["chart"], r["weight"], r["L"], r["family"]) == (mu0, chart, weight, L, fam.value):
                    vals.append("   error" if r["value"] is None else f"{r['value']:8.1f}")
            lines.append(f"  {fam.value:>4} " + " ".join(vals))
    return "\n".join(lines)
