"""Monte Carlo run-length engine (zero-state ARL and CED).

Replication ``r`` of grid cell ``k`` always draws its counts from
``substream(seed, k, r)`` and always in the same block layout, so a
replication's count path depends only on ``(seed, k, r)``.  That gives

* results that are bit-identical for any number of workers, and
* common random numbers across chart designs that share a cell index:
  the pathwise run length is then monotone in the limit half-width.

Replications are advanced together in numpy vectors, one time step per
column of a pre-drawn block of counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ._random import substream
from .charts import ChartSpec, advance, initial_accumulators, violates
from .dist import CountModel
from .exceptions import EstimationError, ParameterError

DEFAULT_TARGET_ARL = 370.0
DEFAULT_MAX_T = int(100 * DEFAULT_TARGET_ARL)
CHUNK_REPS = 2500
FIRST_BLOCK = 512
MAX_BLOCK = 8192


@dataclass(frozen=True)
class ChangeScenario:
    """Counts follow ``in_model`` for ``t < tau`` and ``out_model`` from ``tau`` on."""

    in_model: CountModel
    out_model: CountModel
    tau: int = 1

    def __post_init__(self):
        if int(self.tau) < 1:
            raise ParameterError(f"change point tau must be >= 1, got {self.tau}")
        object.__setattr__(self, "tau", int(self.tau))


@dataclass(frozen=True)
class RunLengthStats:
    """Summary of simulated run lengths (ARL, or CED when ``tau > 1``).

    ``reps_attempted`` counts every replication simulated, including the
    ones discarded because they alarmed before the change point.
    """

    mean: float
    se: float
    reps_used: int
    reps_discarded: int
    reps_censored: int
    max_t: int
    reps_attempted: int
    run_lengths: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("run_lengths")
        return d


def _block_schedule(max_t: int):
    """Yield ``(t0, size)`` blocks covering times ``t0+1 .. t0+size``."""
    t0, size = 0, FIRST_BLOCK
    while t0 < max_t:
        n = min(size, max_t - t0)
        yield t0, n
        t0 += n
        size = min(2 * size, MAX_BLOCK)


def _draw_block(gens, scenario: ChangeScenario, t0: int, n: int) -> np.ndarray:
    """Counts for times ``t0+1 .. t0+n``, one column per generator."""
    n_in = min(n, max(0, scenario.tau - 1 - t0))
    n_out = n - n_in
    out = np.empty((n, len(gens)), dtype=np.int64)
    for i, g in enumerate(gens):
        if n_in:
            out[:n_in, i] = scenario.in_model.sample(g, n_in)
        if n_out:
            out[n_in:, i] = scenario.out_model.sample(g, n_out)
    return out


def simulate_run_lengths(
    spec: ChartSpec,
    scenario: ChangeScenario,
    seed: int,
    cell: int,
    rep_start: int,
    rep_stop: int,
    max_t: int,
) -> np.ndarray:
    """Run lengths for replications ``rep_start .. rep_stop-1``.

    A run that has not alarmed by ``max_t`` is reported as ``max_t + 1``
    (callers treat that as censored).
    """
    reps = rep_stop - rep_start
    a0, b0, c0, _ = initial_accumulators(spec)
    a = np.full(reps, a0)
    b = np.full(reps, b0)
    c = np.full(reps, c0)
    rl = np.full(reps, max_t + 1, dtype=np.int64)
    pos = np.arange(reps)
    gens = [substream(seed, cell, r) for r in range(rep_start, rep_stop)]

    for t0, n in _block_schedule(max_t):
        if pos.size == 0:
            break
        X = _draw_block([gens[p] for p in pos], scenario, t0, n)
        alive = np.ones(pos.size, dtype=bool)
        for j in range(n):
            a, b, c, stat = advance(spec, a, b, c, X[j])
            hit = violates(spec, stat) & alive
            if hit.any():
                rl[pos[hit]] = t0 + j + 1
                alive &= ~hit
                if not alive.any():
                    break
        pos, a, b, c = pos[alive], a[alive], b[alive], c[alive]
    return rl


def _chunks(rep_start: int, rep_stop: int):
    for lo in range(rep_start, rep_stop, CHUNK_REPS):
        yield lo, min(lo + CHUNK_REPS, rep_stop)


def _run_tasks(tasks, n_jobs: int) -> list[np.ndarray]:
    """Evaluate ``simulate_run_lengths`` argument tuples, results in task order."""
    if n_jobs is None or n_jobs <= 1 or len(tasks) <= 1:
        return [simulate_run_lengths(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        futures = [pool.submit(simulate_run_lengths, *t) for t in tasks]
        return [f.result() for f in futures]


def run_lengths(spec, scenario, seed, reps, max_t=DEFAULT_MAX_T, cell=0, n_jobs=1, rep_start=0):
    """Raw run lengths of ``reps`` replications (censored runs are ``max_t + 1``)."""
    tasks = [(spec, scenario, seed, cell, lo, hi, max_t) for lo, hi in _chunks(rep_start, rep_start + reps)]
    parts = _run_tasks(tasks, n_jobs)
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def _summarize(delays: np.ndarray, censored: int, discarded: int, attempted: int, max_t: int) -> RunLengthStats:
    n = delays.size
    if n == 0 or censored == n:
        raise EstimationError(
            f"no usable runs: {discarded} discarded, {censored} censored of {attempted}"
        )
    mean = float(delays.mean())
    se = float(delays.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return RunLengthStats(mean, se, n, discarded, censored, max_t, attempted, delays)


def zero_state_arl(
    spec: ChartSpec,
    model: CountModel,
    reps: int = 10_000,
    seed: int = 0,
    max_t: int = DEFAULT_MAX_T,
    cell: int = 0,
    n_jobs: int = 1,
) -> RunLengthStats:
    """Zero-state ARL of ``spec`` when every count comes from ``model``.

    Censored runs enter the mean as ``max_t`` and are counted in
    ``reps_censored``.
    """
    if reps < 1:
        raise ParameterError("reps must be >= 1")
    rl = run_lengths(spec, ChangeScenario(model, model, 1), seed, reps, max_t, cell, n_jobs)
    censored = int((rl > max_t).sum())
    return _summarize(np.minimum(rl, max_t), censored, 0, reps, max_t)


def ced(
    spec: ChartSpec,
    scenario: ChangeScenario,
    reps: int = 10_000,
    seed: int = 0,
    max_t: int = DEFAULT_MAX_T,
    cell: int = 0,
    n_jobs: int = 1,
    max_rounds: int = 20,
) -> RunLengthStats:
    """Conditional expected delay CED(tau).

    Runs that alarm before ``tau`` are discarded.  Extra replications (with
    fresh indices) are simulated until ``reps`` runs survive; the result
    uses the first ``reps`` survivors in replication order, so it does not
    depend on how many extra runs a round happened to request.
    """
    if reps < 1:
        raise ParameterError("reps must be >= 1")
    tau = scenario.tau
    if max_t < tau:
        raise ParameterError("max_t must be at least tau")
    parts: list[np.ndarray] = []
    attempted = used = 0
    batch = reps
    for _ in range(max_rounds):
        rl = run_lengths(spec, scenario, seed, batch, max_t, cell, n_jobs, rep_start=attempted)
        parts.append(rl)
        attempted += batch
        used += int((rl >= tau).sum())
        if used >= reps:
            break
        rate = 1.0 - used / attempted
        if rate >= 1.0:
            batch = 4 * batch
        else:
            batch = int(math.ceil((reps - used) / (1.0 - rate) * 1.05)) + 1
    rl = np.concatenate(parts)
    ok = rl >= tau
    if ok.sum() > reps:
        cut = int(np.flatnonzero(ok)[reps - 1]) + 1
        rl, ok = rl[:cut], ok[:cut]
    kept = rl[ok]
    censored = int((kept > max_t).sum())
    delays = np.minimum(kept, max_t) - tau + 1
    return _summarize(delays, censored, int((~ok).sum()), rl.size, max_t)


@dataclass
class CellResult:
    """One table cell: the design, the scenario, and its statistics or error."""

    label: dict
    spec: ChartSpec
    scenario: ChangeScenario
    stats: RunLengthStats | None = None
    error: str | None = None


def table(grid, reps: int = 10_000, seed: int = 0, max_t: int = DEFAULT_MAX_T, n_jobs: int = 1):
    """Evaluate every ``(spec, scenario[, label])`` cell of ``grid``.

    Cell ``k`` uses substreams ``(seed, k, r)``.  Zero-state cells
    (``tau == 1``) are submitted to the worker pool together so that small
    out-of-control cells and long in-control cells share the workers.
    Failures are recorded per cell.
    """
    cells = []
    for item in grid:
        spec, scenario, *rest = item
        cells.append(CellResult(dict(rest[0]) if rest else {}, spec, scenario))
    if not cells:
        return []

    tasks, owners = [], []
    for k, cell in enumerate(cells):
        if cell.scenario.tau == 1:
            for lo, hi in _chunks(0, reps):
                tasks.append((cell.spec, cell.scenario, seed, k, lo, hi, max_t))
                owners.append(k)
    try:
        parts = _run_tasks(tasks, n_jobs)
    except Exception:
        # fall back to per-cell evaluation so one bad cell cannot sink the rest
        parts = None

    collected: dict[int, list[np.ndarray]] = {}
    if parts is not None:
        for k, p in zip(owners, parts):
            collected.setdefault(k, []).append(p)

    for k, cell in enumerate(cells):
        try:
            if cell.scenario.tau == 1:
                if k in collected:
                    rl = np.concatenate(collected[k])
                else:
                    rl = run_lengths(cell.spec, cell.scenario, seed, reps, max_t, k, 1)
                censored = int((rl > max_t).sum())
                cell.stats = _summarize(np.minimum(rl, max_t), censored, 0, reps, max_t)
            else:
                cell.stats = ced(cell.spec, cell.scenario, reps, seed, max_t, k, n_jobs)
        except Exception as exc:  # reported inline, remaining cells continue
            cell.error = f"{type(exc).__name__}: {exc}"
    return cells
