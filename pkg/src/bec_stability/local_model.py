"""
Gaussian variational energetics for the contact interaction.

    eps(sigma) = 3/(4 sigma^2) + 3 sigma^2 / 4 + b N / (2 (2 pi)^{3/2} sigma^3)

in oscillator units. Stationary points satisfy N = (2 pi)^{3/2} (sigma^5 - sigma) / b;
for b < 0 that curve has a single maximum, the collapse threshold.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict

from .errors import DomainError
from .params import GAUSS_OVERLAP, EnergyBreakdown, GaussianAnsatz

log = logging.getLogger(__name__)

SIGMA_MIN = 5.0**-0.25
_N_MAX_NUMERATOR = 4.0 * 5.0**-1.25 * (2.0 * math.pi) ** 1.5


@dataclass(frozen=True)
class CriticalPoint:
    sigma_min: float
    n_max: float

    @property
    def n_max_bosons(self) -> int:
        return math.floor(self.n_max)


def _sigma_of(sigma_or_ansatz: Any) -> float:
    if isinstance(sigma_or_ansatz, GaussianAnsatz):
        return sigma_or_ansatz.sigma
    sigma = float(sigma_or_ansatz)
    if not math.isfinite(sigma) or sigma <= 0.0:
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    return sigma


@dataclass(frozen=True)
class LocalModel:
    b: float
    n: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.b):
            raise DomainError(f"b must be finite, got {self.b!r}")
        if not math.isfinite(self.n) or self.n < 0.0:
            raise DomainError(f"N must be >= 0, got {self.n!r}")

    @property
    def coupling(self) -> float:
        return self.b * self.n

    @property
    def collapses(self) -> bool:
        """True when eps -> -inf as sigma -> 0."""
        return self.b < 0.0 and self.n > 0.0

    @property
    def attractive(self) -> bool:
        return self.b < 0.0

    def with_n(self, n: float) -> "LocalModel":
        return replace(self, n=n)

    def energy(self, sigma: Any) -> EnergyBreakdown:
        s = _sigma_of(sigma)
        return EnergyBreakdown(
            kinetic=0.75 / (s * s),
            trap=0.75 * s * s,
            interaction=0.5 * self.b * self.n * GAUSS_OVERLAP / s**3,
        )

    def denergy_dsigma(self, sigma: Any) -> float:
        s = _sigma_of(sigma)
        return -1.5 / s**3 + 1.5 * s - 1.5 * self.b * self.n * GAUSS_OVERLAP / s**4

    def n_of_sigma(self, sigma: Any) -> float:
        return n_of_sigma(self.b, _sigma_of(sigma))

    def describe(self) -> Dict[str, Any]:
        return {"model": "local", "b": self.b, "N": self.n}


def n_of_sigma(b: float, sigma: float) -> float:
    """Boson number for which sigma is stationary; negative means none at N > 0."""
    s = _sigma_of(sigma)
    if b == 0.0:
        raise DomainError("N(sigma) is undefined for b = 0 (stationary sigma is 1 for all N)")
    return (s**5 - s) / (b * GAUSS_OVERLAP)


def critical_point(b: float) -> CriticalPoint:
    """Minimum radius and maximum boson number of the attractive gas."""
    if not b < 0.0:
        raise DomainError(f"critical point needs attractive coupling b < 0, got {b!r}")
    cp = CriticalPoint(sigma_min=SIGMA_MIN, n_max=_N_MAX_NUMERATOR / abs(b))
    log.debug("critical_point | b=%g sigma_min=%.16g n_max=%.16g", b, cp.sigma_min, cp.n_max)
    return cp
