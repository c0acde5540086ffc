"""Gap laws for initial configurations and the two integer renewal laws.

Geometric variables live on ``{1, 2, ...}`` with ``P(G = g) = 2**-g``. The
merge-site law is ``G1 + G2`` (mean 4) and the un-merge law is
``G1 + G2 - 1`` (mean 3).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .rng import RngStream

GAP_LAWS = ("exponential", "uniform", "deterministic", "gamma")


@dataclass(frozen=True)
class GapLaw:
    """A unit-mean positive law. ``shape`` is only used by ``gamma``."""

    name: str
    shape: float = 1.0

    def __post_init__(self):
        if self.name not in GAP_LAWS:
            raise ValueError(f"unknown gap law {self.name!r}; expected one of {GAP_LAWS}")
        if self.name == "gamma" and not self.shape > 0:
            raise ValueError("gamma shape must be positive")

    @property
    def mean(self) -> float:
        return 1.0

    @property
    def variance(self) -> float:
        return {
            "exponential": 1.0,
            "uniform": 1.0 / 3.0,
            "deterministic": 0.0,
            "gamma": 1.0 / self.shape,
        }[self.name]

    def sample(self, n: int, rng: RngStream) -> np.ndarray:
        g = rng.gen
        if self.name == "exponential":
            out = g.exponential(1.0, n)
        elif self.name == "uniform":
            out = g.uniform(0.0, 2.0, n)
        elif self.name == "deterministic":
            out = np.ones(n)
        else:
            out = g.gamma(self.shape, 1.0 / self.shape, n)
        # zero has probability 0 for the continuous laws but floats can hit it
        return np.where(out > 0, out, np.finfo(float).tiny)

    def to_dict(self) -> dict:
        d = {"name": self.name}
        if self.name == "gamma":
            d["shape"] = self.shape
        return d

    @classmethod
    def from_dict(cls, d) -> "GapLaw":
        if isinstance(d, str):
            return cls(d)
        return cls(d["name"], float(d.get("shape", 1.0)))


EXPONENTIAL = GapLaw("exponential")
UNIFORM = GapLaw("uniform")
DETERMINISTIC = GapLaw("deterministic")


@dataclass(frozen=True)
class RenewalLaw:
    """Inter-renewal law ``G1 + G2 - shift`` on the integers.

    ``TAU`` (shift 0) is the spacing of merge sites in the forward dynamics;
    ``RHO`` (shift 1) is the spacing of un-merge sites in the reverse dynamics.
    """

    name: str
    shift: int

    @property
    def minimum(self) -> int:
        return 2 - self.shift

    @property
    def mean(self) -> int:
        return 4 - self.shift

    def pmf(self, k: int) -> Fraction:
        """Exact ``P(X = k)``."""
        m = k + self.shift
        if m < 2:
            return Fraction(0)
        return Fraction(m - 1, 2**m)

    def survival(self, j: int) -> Fraction:
        """Exact ``P(X > j)``; uses ``P(G1 + G2 > m) = (m + 1) / 2**m``."""
        m = j + self.shift
        if m < 1:
            return Fraction(1)
        return Fraction(m + 1, 2**m)

    def delay_pmf(self, j: int) -> Fraction:
        """Stationary delay ``P(D = j) = P(X > j) / E X`` for ``j >= 0``."""
        if j < 0:
            return Fraction(0)
        return self.survival(j) / self.mean

    def delay_survival(self, j: int) -> Fraction:
        """Exact ``P(D >= j)``."""
        return 1 - sum((self.delay_pmf(i) for i in range(j)), Fraction(0))

    def pmf_array(self, kmax: int) -> np.ndarray:
        return np.array([float(self.pmf(k)) for k in range(kmax + 1)])

    def sample(self, size, rng: RngStream) -> np.ndarray:
        g = rng.gen
        return g.geometric(0.5, size) + g.geometric(0.5, size) - self.shift

    def sample_delay(self, rng: RngStream) -> int:
        cdf = _delay_cdf(self)
        return int(np.searchsorted(cdf, rng.gen.random(), side="right"))


TAU = RenewalLaw("tau", 0)
RHO = RenewalLaw("rho", 1)


@lru_cache(maxsize=None)
def _delay_cdf(law: RenewalLaw, jmax: int = 256) -> np.ndarray:
    # the tail beyond jmax has mass below 2**-240
    pmf = np.array([float(law.delay_pmf(j)) for j in range(jmax)])
    return np.cumsum(pmf)


def sample_gaps(n: int, law: GapLaw, rng: RngStream, intensity_mode: str = "theoretical"):
    """``n`` i.i.d. gaps from ``law`` on a circle."""
    from .forward import GapSequence

    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"need at least two gaps, got n={n!r}")
    if not isinstance(law, GapLaw):
        raise TypeError(f"expected a GapLaw, got {type(law).__name__}")
    return GapSequence(law.sample(int(n), rng), intensity_mode=intensity_mode)


def sample_renewal_gap(law: RenewalLaw, rng: RngStream) -> int:
    """One inter-renewal draw."""
    return int(law.sample(1, rng)[0])
