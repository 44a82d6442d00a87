"""
Parameter records, unit system and shared value types.

All numerics run in oscillator units (hbar = m = omega = 1). SI values are
reduced once at the boundary with `to_dimensionless` and restored with
`from_dimensionless` / `DimensionlessScale`.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from .errors import ConfigError, DomainError

log = logging.getLogger(__name__)

# (2*pi)^(-3/2): contact self-overlap of the unit-width Gaussian
GAUSS_OVERLAP = (2.0 * math.pi) ** -1.5


def _require_positive(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class TrapGasParams:
    mass: float
    trap_frequency: float
    hbar: float
    scattering_length: float = 0.0  # negative = attractive

    def __post_init__(self) -> None:
        _require_positive("mass", self.mass)
        _require_positive("trap_frequency", self.trap_frequency)
        _require_positive("hbar", self.hbar)
        _require_finite("scattering_length", self.scattering_length)

    @classmethod
    def oscillator(cls, scattering_length: float = 0.0) -> "TrapGasParams":
        return cls(1.0, 1.0, 1.0, scattering_length)


@dataclass(frozen=True)
class ContactKernel:
    b: float  # energy * volume

    def __post_init__(self) -> None:
        _require_finite("contact strength B", self.b)


@dataclass(frozen=True)
class ScreenedKernel:
    """Screened attraction -a * exp(-gamma * s) / s."""

    a: float  # energy * length
    gamma: float = 0.0  # 1 / length

    def __post_init__(self) -> None:
        _require_finite("screened amplitude A", self.a)
        _require_finite("screening Gamma", self.gamma)
        if self.a < 0.0:
            raise DomainError(f"screened amplitude A must be >= 0, got {self.a!r}")
        if self.gamma < 0.0:
            raise DomainError(f"screening Gamma must be >= 0, got {self.gamma!r}")


@dataclass(frozen=True)
class CompositeKernel:
    contact: ContactKernel
    screened: ScreenedKernel


InteractionKernel = Union[ContactKernel, ScreenedKernel, CompositeKernel]


def kernel_coefficients(kernel: InteractionKernel) -> Tuple[float, float, float]:
    """Return (b, a, gamma); absent parts contribute zeros."""
    if isinstance(kernel, ContactKernel):
        return kernel.b, 0.0, 0.0
    if isinstance(kernel, ScreenedKernel):
        return 0.0, kernel.a, kernel.gamma
    if isinstance(kernel, CompositeKernel):
        return kernel.contact.b, kernel.screened.a, kernel.screened.gamma
    raise DomainError(f"Unsupported kernel: {kernel!r}")


def kernel_to_dict(kernel: InteractionKernel) -> Dict[str, Any]:
    b, a, gamma = kernel_coefficients(kernel)
    if isinstance(kernel, ContactKernel):
        return {"type": "contact", "B": b}
    if isinstance(kernel, ScreenedKernel):
        return {"type": "screened", "A": a, "Gamma": gamma}
    return {"type": "composite", "B": b, "A": a, "Gamma": gamma}


def kernel_from_dict(data: Dict[str, Any]) -> InteractionKernel:
    kind = str(data.get("type", "contact")).strip().lower()
    try:
        if kind == "contact":
            return ContactKernel(float(data.get("B", 0.0)))
        if kind == "screened":
            return ScreenedKernel(float(data.get("A", 0.0)), float(data.get("Gamma", 0.0)))
        if kind == "composite":
            return CompositeKernel(
                ContactKernel(float(data.get("B", 0.0))),
                ScreenedKernel(float(data.get("A", 0.0)), float(data.get("Gamma", 0.0))),
            )
    except (TypeError, ValueError) as e:
        if isinstance(e, DomainError):
            raise ConfigError("kernel", str(e)) from e
        raise ConfigError("kernel", f"non-numeric value in {data!r}") from e
    raise ConfigError("kernel.type", f"unknown kernel type {kind!r}")


@dataclass(frozen=True)
class DimensionlessScale:
    length_unit: float  # a_ho = sqrt(hbar / (m omega))
    energy_unit: float  # hbar omega
    contact_unit: float  # hbar omega a_ho^3
    amplitude_unit: float = field(init=False)  # hbar omega a_ho
    inverse_length_unit: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "amplitude_unit", self.energy_unit * self.length_unit)
        object.__setattr__(self, "inverse_length_unit", 1.0 / self.length_unit)

    @classmethod
    def from_params(cls, params: TrapGasParams) -> "DimensionlessScale":
        a_ho = math.sqrt(params.hbar / (params.mass * params.trap_frequency))
        e_unit = params.hbar * params.trap_frequency
        return cls(length_unit=a_ho, energy_unit=e_unit, contact_unit=e_unit * a_ho**3)

    def length_to_si(self, x: float) -> float:
        return x * self.length_unit

    def length_from_si(self, x: float) -> float:
        return x / self.length_unit

    def energy_to_si(self, e: float) -> float:
        return e * self.energy_unit

    def energy_from_si(self, e: float) -> float:
        return e / self.energy_unit

    def as_dict(self) -> Dict[str, float]:
        return {
            "length_unit": self.length_unit,
            "energy_unit": self.energy_unit,
            "contact_unit": self.contact_unit,
        }


def _rescale_kernel(
    kernel: InteractionKernel, contact: float, amplitude: float, inverse_length: float
) -> InteractionKernel:
    if isinstance(kernel, ContactKernel):
        return ContactKernel(kernel.b / contact)
    if isinstance(kernel, ScreenedKernel):
        return ScreenedKernel(kernel.a / amplitude, kernel.gamma / inverse_length)
    if isinstance(kernel, CompositeKernel):
        return CompositeKernel(
            ContactKernel(kernel.contact.b / contact),
            ScreenedKernel(
                kernel.screened.a / amplitude, kernel.screened.gamma / inverse_length
            ),
        )
    raise DomainError(f"Unsupported kernel: {kernel!r}")


def to_dimensionless(
    params: TrapGasParams, kernel: InteractionKernel
) -> Tuple[DimensionlessScale, InteractionKernel]:
    """b -> B/(hbar w a_ho^3), a -> A/(hbar w a_ho), gamma -> Gamma a_ho."""
    scale = DimensionlessScale.from_params(params)
    reduced = _rescale_kernel(
        kernel, scale.contact_unit, scale.amplitude_unit, scale.inverse_length_unit
    )
    return scale, reduced


def from_dimensionless(
    scale: DimensionlessScale, kernel: InteractionKernel
) -> InteractionKernel:
    return _rescale_kernel(
        kernel,
        1.0 / scale.contact_unit,
        1.0 / scale.amplitude_unit,
        1.0 / scale.inverse_length_unit,
    )


def contact_strength_from_scattering(params: TrapGasParams) -> float:
    """B = 4 pi hbar^2 a_s / m."""
    return 4.0 * math.pi * params.hbar**2 * params.scattering_length / params.mass


@dataclass(frozen=True)
class GaussianAnsatz:
    sigma: float

    def __post_init__(self) -> None:
        _require_positive("sigma", self.sigma)

    def wavefunction(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        s = self.sigma
        return math.pi**-0.75 * s**-1.5 * np.exp(-(r * r) / (2.0 * s * s))

    def density(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        s = self.sigma
        return math.pi**-1.5 * s**-3 * np.exp(-(r * r) / (s * s))


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy per particle in units of hbar*omega."""

    kinetic: float
    trap: float
    interaction: float
    total: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "total", self.kinetic + self.trap + self.interaction)

    def virial(self) -> float:
        """2K - 2T + 3I; zero at any stationary state in a harmonic trap."""
        return 2.0 * self.kinetic - 2.0 * self.trap + 3.0 * self.interaction

    def scaled(self, factor: float) -> "EnergyBreakdown":
        return EnergyBreakdown(
            self.kinetic * factor, self.trap * factor, self.interaction * factor
        )

    def as_dict(self, prefix: str = "e_") -> Dict[str, float]:
        return {
            f"{prefix}total": self.total,
            f"{prefix}kin": self.kinetic,
            f"{prefix}trap": self.trap,
            f"{prefix}int": self.interaction,
        }


def load_config(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a JSON parameter file and check its top-level schema."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError("--config", f"file not found: {p}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError("--config", f"invalid JSON in {p}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("--config", "top level must be a JSON object")

    allowed = {
        "mass", "omega", "hbar", "a_s", "kernel", "units", "model", "N", "sigma",
    }
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError("--config", f"unknown keys: {unknown}")
    units = data.get("units", "oscillator")
    if units not in ("si", "oscillator"):
        raise ConfigError("units", f"must be 'si' or 'oscillator', got {units!r}")
    if "kernel" in data and not isinstance(data["kernel"], dict):
        raise ConfigError("kernel", "must be a JSON object")
    log.info("config_loaded", extra={"path": str(p), "keys": sorted(data)})
    return data
