"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations

from typing import Any, Optional


class BecStabilityError(Exception):
    """Root of every error raised by bec_stability."""

    exit_code = 1


class DomainError(BecStabilityError, ValueError):
    exit_code = 2


class ConfigError(DomainError):
    """Bad flag or config-file value; ``flag`` names the offending input."""

    def __init__(self, flag: str, message: str) -> None:
        super().__init__(f"{flag}: {message}")
        self.flag = flag


class BracketError(BecStabilityError, ValueError):
    exit_code = 2


class NumericalError(BecStabilityError, ArithmeticError):
    exit_code = 4


class PoleError(NumericalError):
    def __init__(self, sigma: float, message: str = "") -> None:
        super().__init__(message or f"N(sigma) has a pole at sigma={sigma!r}")
        self.sigma = sigma


class ConvergenceError(BecStabilityError, RuntimeError):
    exit_code = 4

    def __init__(self, message: str, state: Optional[Any] = None) -> None:
        super().__init__(message)
        self.state = state


class CollapseError(BecStabilityError, RuntimeError):
    """Attractive condensate shrinks below the grid resolution."""

    exit_code = 3

    def __init__(self, iteration: int, rms_radius: float, energy: float) -> None:
        super().__init__(
            f"collapse at iteration {iteration}: rms radius {rms_radius:.6g}, "
            f"energy {energy:.12g}"
        )
        self.iteration = iteration
        self.rms_radius = rms_radius
        self.energy = energy
