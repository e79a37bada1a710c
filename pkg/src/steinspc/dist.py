"""Count distributions indexed by mean and dispersion index.

Poisson, negative binomial (NB) and zero-inflated Poisson (ZIP) models are
all described by ``(mu, disp)`` where ``disp = variance / mean``.  The
family-specific parameters are derived on demand by moment matching.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .exceptions import ParameterError


class Family(str, enum.Enum):
    POISSON = "poi"
    NEGBIN = "nb"
    ZIP = "zip"

    @classmethod
    def parse(cls, value: "Family | str") -> "Family":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"poisson": "poi", "negbin": "nb", "negative_binomial": "nb"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ParameterError(f"unknown count family {value!r}") from None


def nb_params(mu: float, disp: float) -> tuple[float, float]:
    """Map ``(mu, disp)`` to NB ``(n, p)`` with pmf Γ(n+x)/(Γ(n) x!) pⁿ (1-p)ˣ."""
    if not mu > 0:
        raise ParameterError(f"mean must be positive, got {mu}")
    if not disp > 1:
        raise ParameterError(f"NB requires dispersion index > 1, got {disp}")
    return mu / (disp - 1.0), 1.0 / disp


def zip_params(mu: float, disp: float) -> tuple[float, float]:
    """Map ``(mu, disp)`` to ZIP ``(omega, lam)``; ``disp == 1`` gives ``omega == 0``."""
    if not mu > 0:
        raise ParameterError(f"mean must be positive, got {mu}")
    if not disp >= 1:
        raise ParameterError(f"ZIP requires dispersion index >= 1, got {disp}")
    lam = mu + disp - 1.0
    return (disp - 1.0) / lam, lam


@dataclass(frozen=True)
class CountModel:
    """A count distribution specified by its mean and dispersion index.

    Only ``(family, mu, disp)`` are stored; NB/ZIP parameters are always
    recomputed from them.
    """

    family: Family
    mu: float
    disp: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "disp", float(self.disp))
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ParameterError(f"mean must be positive and finite, got {self.mu}")
        if self.family is Family.POISSON:
            if self.disp != 1.0:
                raise ParameterError("Poisson model requires disp == 1")
        elif not (math.isfinite(self.disp) and self.disp > 1):
            raise ParameterError(f"{self.family.name} model requires disp > 1, got {self.disp}")

    @classmethod
    def poisson(cls, mu: float) -> "CountModel":
        return cls(Family.POISSON, mu, 1.0)

    @classmethod
    def negbin(cls, mu: float, disp: float) -> "CountModel":
        return cls(Family.NEGBIN, mu, disp)

    @classmethod
    def zip(cls, mu: float, disp: float) -> "CountModel":
        return cls(Family.ZIP, mu, disp)

    @property
    def params(self) -> tuple[float, ...]:
        """Family-specific parameters: ``(mu,)``, ``(n, p)`` or ``(omega, lam)``."""
        if self.family is Family.POISSON:
            return (self.mu,)
        if self.family is Family.NEGBIN:
            return nb_params(self.mu, self.disp)
        return zip_params(self.mu, self.disp)

    def pmf(self, x):
        """P(X = x); vectorised over ``x``."""
        x = np.asarray(x)
        if self.family is Family.POISSON:
            out = stats.poisson.pmf(x, self.mu)
        elif self.family is Family.NEGBIN:
            n, p = self.params
            out = stats.nbinom.pmf(x, n, p)
        else:
            omega, lam = self.params
            out = omega * (x == 0) + (1.0 - omega) * stats.poisson.pmf(x, lam)
        return out if out.ndim else float(out)

    def sf(self, x):
        """Upper tail P(X > x)."""
        if self.family is Family.POISSON:
            return stats.poisson.sf(x, self.mu)
        if self.family is Family.NEGBIN:
            n, p = self.params
            return stats.nbinom.sf(x, n, p)
        omega, lam = self.params
        return (1.0 - omega) * stats.poisson.sf(x, lam)

    def moments(self) -> tuple[float, float]:
        """Exact mean and variance recomputed from the internal parameters."""
        if self.family is Family.POISSON:
            return self.mu, self.mu
        if self.family is Family.NEGBIN:
            n, p = self.params
            return n * (1 - p) / p, n * (1 - p) / (p * p)
        omega, lam = self.params
        return (1 - omega) * lam, (1 - omega) * lam * (1 + omega * lam)

    def sample(self, rng: np.random.Generator, size=None):
        """Draw counts from ``rng``; deterministic given the generator state."""
        if self.family is Family.POISSON:
            return rng.poisson(self.mu, size)
        if self.family is Family.NEGBIN:
            n, p = self.params
            return rng.poisson(rng.gamma(n, (1.0 - p) / p, size))
        omega, lam = self.params
        inflated = rng.random(size) < omega
        return np.where(inflated, 0, rng.poisson(lam, size))

    def __str__(self):
        if self.family is Family.POISSON:
            return f"Poi({self.mu:g})"
        return f"{self.family.name}({self.mu:g}, I={self.disp:g})"


def pmf(model: CountModel, x):
    return model.pmf(x)


def moments(model: CountModel) -> tuple[float, float]:
    return model.moments()


def sample(model: CountModel, rng: np.random.Generator, size=None):
    return model.sample(rng, size)
