"""Deterministic random substreams.

Every replication draws from its own generator keyed by
``(seed, cell, replication)``, so results never depend on how work is
split across processes.
"""

from __future__ import annotations

import os

import numpy as np

SEED_ENV = "STEIN_SPC_SEED"
DEFAULT_SEED = 20231


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return an independent PCG64 generator for ``key`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def resolve_seed(seed: int | None) -> int:
    """Explicit seed, else ``$STEIN_SPC_SEED``, else a fixed default."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env, 0)
    return DEFAULT_SEED
