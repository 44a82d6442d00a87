"""
Gaussian variational energetics for the composite kernel

    V(s) = b delta(s) - a exp(-gamma s) / s

The Gaussian-Yukawa pair integral has the closed form

    <exp(-gamma s)/s> = sqrt(2/pi)/sigma * g(x),   x = gamma sigma / sqrt(2),
    g(x) = 1 - sqrt(pi) x erfcx(x)

which is evaluated through the continued-fraction tail of erfcx so that no
cancellation occurs at large gamma*sigma.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, Tuple

from .errors import DomainError, PoleError
from .local_model import _sigma_of
from .oracle import fd_derivative
from .params import (
    GAUSS_OVERLAP,
    EnergyBreakdown,
    InteractionKernel,
    kernel_coefficients,
)
from .solver import find_branches
from .specfun import SERIES_LIMIT, erfcx, erfcx_tail

log = logging.getLogger(__name__)

ERFC_VARIANTS = ("over_sqrt2", "times_sqrt2")
DEFAULT_ERFC_VARIANT = "over_sqrt2"

_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_POLE_RTOL = 64 * 2.2e-16
_ORACLE_POLE_RTOL = 1e-9

__all__ = [
    "DEFAULT_ERFC_VARIANT",
    "ERFC_VARIANTS",
    "NonlocalModel",
    "find_branches",
    "screening_factors",
]


def screening_factors(x: float) -> Tuple[float, float]:
    """
    Return (g, h) with g = 1 - sqrt(pi) x erfcx(x) and h = 2 x^2 g - 1.

    g scales the screened pair integral, h its sigma-derivative.
    g(0) = 1, h(0) = -1; g ~ 1/(2x^2) and h ~ -3/(2x^2) for large x.
    """
    if x < SERIES_LIMIT:
        t1 = erfcx_tail(x, 1)
        g = t1 / (x + t1)
        return g, 2.0 * x * x * g - 1.0
    t2 = erfcx_tail(x, 2)
    t1 = 0.5 / (x + t2)
    g = t1 / (x + t1)
    h = -(x * t2 + 0.5) / ((x + t2) * (x + t1))
    return g, h


@dataclass(frozen=True)
class NonlocalModel:
    b: float
    a: float
    gamma: float
    n: float = 0.0
    erfc_variant: str = DEFAULT_ERFC_VARIANT

    def __post_init__(self) -> None:
        for name in ("b", "a", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.a < 0.0:
            raise DomainError(f"screened amplitude a must be >= 0, got {self.a!r}")
        if self.gamma < 0.0:
            raise DomainError(f"screening gamma must be >= 0, got {self.gamma!r}")
        if not math.isfinite(self.n) or self.n < 0.0:
            raise DomainError(f"N must be >= 0, got {self.n!r}")
        if self.erfc_variant not in ERFC_VARIANTS:
            raise DomainError(
                f"erfc_variant must be one of {ERFC_VARIANTS}, got {self.erfc_variant!r}"
            )

    @classmethod
    def from_kernel(cls, kernel: InteractionKernel, n: float = 0.0) -> "NonlocalModel":
        b, a, gamma = kernel_coefficients(kernel)
        return cls(b=b, a=a, gamma=gamma, n=n)

    @property
    def collapses(self) -> bool:
        return self.b < 0.0 and self.n > 0.0

    @property
    def attractive(self) -> bool:
        return self.b < 0.0 or self.a > 0.0

    def with_n(self, n: float) -> "NonlocalModel":
        return replace(self, n=n)

    def effective_contact(self) -> float:
        """Contact strength the screened part reduces to when gamma*sigma >> 1."""
        if self.gamma == 0.0:
            raise DomainError("unscreened kernel has no contact limit")
        return self.b - 4.0 * math.pi * self.a / self.gamma**2

    def _x(self, s: float) -> float:
        return self.gamma * s / _SQRT2

    def pair_integrals(self, sigma: Any) -> Tuple[float, float]:
        """(contact overlap, screened pair integral <exp(-gamma s)/s>) at width sigma."""
        s = _sigma_of(sigma)
        g, _ = screening_factors(self._x(s))
        return GAUSS_OVERLAP / s**3, _SQRT_2_OVER_PI * g / s

    def energy(self, sigma: Any) -> EnergyBreakdown:
        s = _sigma_of(sigma)
        contact, screened = self.pair_integrals(s)
        return EnergyBreakdown(
            kinetic=0.75 / (s * s),
            trap=0.75 * s * s,
            interaction=0.5 * self.n * (self.b * contact - self.a * screened),
        )

    def interaction_slope(self, sigma: Any) -> float:
        """d(interaction)/d(sigma) per boson."""
        s = _sigma_of(sigma)
        _, h = screening_factors(self._x(s))
        return 0.5 * (
            -3.0 * self.b * GAUSS_OVERLAP / s**4 - self.a * _SQRT_2_OVER_PI * h / (s * s)
        )

    def denergy_dsigma(self, sigma: Any) -> float:
        s = _sigma_of(sigma)
        return -1.5 / s**3 + 1.5 * s + self.n * self.interaction_slope(s)

    def n_of_sigma(self, sigma: Any) -> float:
        return self.n_of_sigma_closed_form(sigma, self.erfc_variant)

    def n_of_sigma_closed_form(self, sigma: Any, variant: str | None = None) -> float:
        """
        Closed-form stationary boson number

            N = ((sigma^4 - 1)/2) / D
            D = b/(2 (2pi)^{3/2} sigma) + a G^2 sigma^3 / (3 sqrt(2 pi))
                - (a/6) sqrt(2/pi) sigma - (a G^3/6) sigma^4 exp(sigma^2 G^2/2) erfc(arg)

        with arg = sigma G / sqrt(2) ("over_sqrt2") or sigma G sqrt(2) ("times_sqrt2").
        """
        s = _sigma_of(sigma)
        variant = variant or self.erfc_variant
        sg = s * self.gamma
        if variant == "over_sqrt2":
            scaled = erfcx(sg / _SQRT2)
        elif variant == "times_sqrt2":
            scaled = erfcx(sg * _SQRT2) * math.exp(-1.5 * sg * sg)
        else:
            raise DomainError(f"unknown erfc variant {variant!r}")

        a, G = self.a, self.gamma
        terms = (
            self.b / (2.0 * _SQRT_2PI**3 * s),
            a * G * G * s**3 / (3.0 * _SQRT_2PI),
            -(a / 6.0) * _SQRT_2_OVER_PI * s,
            -(a * G**3 / 6.0) * s**4 * scaled,
        )
        denominator = math.fsum(terms)
        if denominator == 0.0 or abs(denominator) <= _POLE_RTOL * sum(abs(t) for t in terms):
            raise PoleError(s)
        return 0.5 * (s**4 - 1.0) / denominator

    def n_of_sigma_oracle(self, sigma: Any) -> float:
        """N solving d eps/d sigma = 0, from Richardson derivatives of energy()."""
        s = _sigma_of(sigma)
        unit = self.with_n(1.0)
        oscillator = fd_derivative(lambda x: unit.energy(x).kinetic + unit.energy(x).trap, s)
        response = fd_derivative(lambda x: unit.energy(x).interaction, s)
        scale = 1.5 * abs(self.b) * GAUSS_OVERLAP / s**4 + 0.5 * self.a * _SQRT_2_OVER_PI / (s * s)
        if scale == 0.0 or abs(response.value) <= _ORACLE_POLE_RTOL * scale:
            raise PoleError(s, f"interaction response vanishes at sigma={s!r}")
        return -oscillator.value / response.value

    def describe(self) -> Dict[str, Any]:
        return {
            "model": "nonlocal",
            "b": self.b,
            "A": self.a,
            "Gamma": self.gamma,
            "N": self.n,
            "erfc_variant": self.erfc_variant,
        }
