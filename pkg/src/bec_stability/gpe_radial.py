"""
Imaginary-time relaxation of the radial Gross-Pitaevskii equation

    mu psi = [-1/2 laplacian + r^2/2 + g |psi|^2] psi,    g = b N,

for u(r) = r psi(r) on r_j = j h (j = 1..M, u_0 = u_{M+1} = 0), normalised as
4 pi sum u^2 h = 1.

Two steppers share the same discrete energy functional:

- "semi-implicit" (default): solve (1 + dtau H[rho_n]) u' = u_n with the
  density frozen, then renormalise. For g < 0 the step is capped at
  0.5 / (|g| max rho) so the tridiagonal matrix stays diagonally dominant.
- "explicit": u' = u_n - dtau H[rho_n] u_n, stable for
  dtau <= h^2 / (2 + h^2 (r_max^2/2 + |g| max rho)); default 0.4 h^2.

Relaxation stops once both the energy change and the residual ||(H - mu) psi||
drop below their tolerances.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from scipy import linalg

from .errors import CollapseError, ConvergenceError, DomainError
from .local_model import SIGMA_MIN, LocalModel
from .params import EnergyBreakdown, GaussianAnsatz
from .solver import find_branches

log = logging.getLogger(__name__)

SCHEMES = ("semi-implicit", "explicit")
BRANCHES = ("stable", "metastable", "unstable")
_FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class RadialGrid:
    r_max: float = 8.0
    points: int = 4000

    def __post_init__(self) -> None:
        if self.points < 64:
            raise DomainError(f"radial grid needs >= 64 points, got {self.points!r}")
        if not math.isfinite(self.r_max) or self.r_max <= 0.0:
            raise DomainError(f"r_max must be > 0, got {self.r_max!r}")
        if self.r_max < 8.0:
            log.warning("grid_short | r_max=%g is below 8 oscillator lengths", self.r_max)

    @property
    def spacing(self) -> float:
        return self.r_max / (self.points + 1)

    @property
    def r(self) -> np.ndarray:
        return self.spacing * np.arange(1, self.points + 1)


@dataclass(frozen=True)
class RelaxConfig:
    dtau: Optional[float] = None  # None -> scheme default
    max_iters: int = 20000
    energy_tol: float = 1e-12
    residual_tol: float = 1e-8
    scheme: str = "semi-implicit"

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.dtau is not None and not self.dtau > 0.0:
            raise DomainError(f"dtau must be > 0, got {self.dtau!r}")
        if self.max_iters < 1:
            raise DomainError(f"max_iters must be >= 1, got {self.max_iters!r}")
        if not (self.energy_tol > 0.0 and self.residual_tol > 0.0):
            raise DomainError("energy_tol and residual_tol must be > 0")

    def step(self, grid: RadialGrid) -> float:
        if self.dtau is not None:
            return self.dtau
        return 0.5 if self.scheme == "semi-implicit" else 0.4 * grid.spacing**2


@dataclass(frozen=True, eq=False)
class RadialState:
    grid: RadialGrid
    coupling: float
    u: np.ndarray
    norm: float
    energy: EnergyBreakdown
    mu: float
    residual: float
    iterations: int
    converged: bool
    history: pd.DataFrame = field(repr=False)

    @property
    def psi(self) -> np.ndarray:
        return self.u / self.grid.r

    def profile_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"r": self.grid.r, "psi": self.psi, "u": self.u})


# -------------------- discrete operators -------------------- #
def _inner(grid: RadialGrid, f: np.ndarray, g: np.ndarray) -> float:
    return _FOUR_PI * grid.spacing * float(np.dot(f, g))


def normalize(u: np.ndarray, grid: RadialGrid) -> np.ndarray:
    n = _inner(grid, u, u)
    if not (math.isfinite(n) and n > 0.0):
        raise DomainError("cannot normalise a zero or non-finite state")
    return u / math.sqrt(n)


def _laplacian(u: np.ndarray, h: float) -> np.ndarray:
    padded = np.concatenate(([0.0], u, [0.0]))
    return (padded[2:] - 2.0 * u + padded[:-2]) / (h * h)


def apply_hamiltonian(u: np.ndarray, grid: RadialGrid, coupling: float) -> np.ndarray:
    r = grid.r
    return -0.5 * _laplacian(u, grid.spacing) + (0.5 * r * r + coupling * (u / r) ** 2) * u


def radial_energy(u: np.ndarray, grid: RadialGrid, coupling: float) -> EnergyBreakdown:
    h, r = grid.spacing, grid.r
    du = np.diff(np.concatenate(([0.0], u, [0.0]))) / h
    return EnergyBreakdown(
        kinetic=_FOUR_PI * h * 0.5 * float(np.dot(du, du)),
        trap=_FOUR_PI * h * 0.5 * float(np.dot(r * r, u * u)),
        interaction=_FOUR_PI * h * 0.5 * coupling * float(np.sum(u**4 / (r * r))),
    )


def chemical_potential(energy: EnergyBreakdown) -> float:
    return energy.kinetic + energy.trap + 2.0 * energy.interaction


def residual_norm(u: np.ndarray, grid: RadialGrid, coupling: float, mu: float) -> float:
    res = apply_hamiltonian(u, grid, coupling) - mu * u
    return math.sqrt(_inner(grid, res, res))


def rms_radius(u: np.ndarray, grid: RadialGrid) -> float:
    r = grid.r
    return math.sqrt(_inner(grid, r * r * u, u))


def gaussian_state(grid: RadialGrid, sigma: float) -> np.ndarray:
    return normalize(grid.r * GaussianAnsatz(sigma).wavefunction(grid.r), grid)


def gaussian_overlap(state: RadialState, sigma: float = 1.0) -> float:
    return _inner(state.grid, state.u, gaussian_state(state.grid, sigma))


def virial_residual(state: RadialState) -> float:
    """|2K - 2T + 3I| / |E|; zero for an exact stationary state."""
    return abs(state.energy.virial()) / abs(state.energy.total)


# -------------------- initial state -------------------- #
def variational_sigma(coupling: float, branch: str = "stable") -> float:
    """Gaussian width used to seed the relaxation."""
    if branch not in BRANCHES:
        raise DomainError(f"branch must be one of {BRANCHES}, got {branch!r}")
    if coupling == 0.0:
        return 1.0
    points = find_branches(LocalModel(b=coupling, n=1.0))
    if branch == "unstable":
        maxima = [p.sigma for p in points if p.kind == "maximum"]
        if not maxima:
            raise DomainError(f"no unstable branch at coupling {coupling!r}")
        return maxima[0]
    minima = [p.sigma for p in points if p.kind == "minimum"]
    if not minima:
        log.warning("no_variational_minimum | coupling=%g, seeding at sigma_min", coupling)
        return SIGMA_MIN
    return minima[-1]


# -------------------- relaxation -------------------- #
def _semi_implicit_step(u: np.ndarray, grid: RadialGrid, coupling: float, step: float) -> np.ndarray:
    h, r = grid.spacing, grid.r
    off = -step / (2.0 * h * h)
    bands = np.empty((3, grid.points))
    bands[0, 0], bands[0, 1:] = 0.0, off
    bands[2, -1], bands[2, :-1] = 0.0, off
    bands[1] = 1.0 + step * (1.0 / (h * h) + 0.5 * r * r + coupling * (u / r) ** 2)
    return linalg.solve_banded((1, 1), bands, u, check_finite=False)


def _explicit_step(u: np.ndarray, grid: RadialGrid, coupling: float, step: float) -> np.ndarray:
    return u - step * apply_hamiltonian(u, grid, coupling)


def explicit_step_bound(grid: RadialGrid, coupling: float, u: np.ndarray) -> float:
    """Largest stable explicit dtau: h^2 / (2 + h^2 (r_max^2/2 + |g| max rho))."""
    rho_max = float(np.max((u / grid.r) ** 2))
    h2 = grid.spacing**2
    return h2 / (2.0 + h2 * (0.5 * grid.r_max**2 + abs(coupling) * rho_max))


def _capped_step(step: float, u: np.ndarray, grid: RadialGrid, coupling: float) -> float:
    if coupling >= 0.0:
        return step
    rho_max = float(np.max((u / grid.r) ** 2))
    return min(step, 0.5 / (abs(coupling) * rho_max))


def relax(
    coupling: float,
    grid: RadialGrid = RadialGrid(),
    config: RelaxConfig = RelaxConfig(),
    sigma0: Optional[float] = None,
    branch: str = "stable",
    initial: Optional[np.ndarray] = None,
) -> RadialState:
    """
    Relax to the lowest state reachable from the initial guess.

    The guess is ``initial`` if given, else the Gaussian at ``sigma0``, else
    the Gaussian at the variational width of ``branch``.
    Raises CollapseError when an attractive state shrinks below two grid
    spacings and ConvergenceError (with ``.state``) after ``max_iters``.
    """
    if not math.isfinite(coupling):
        raise DomainError(f"coupling bN must be finite, got {coupling!r}")
    if initial is not None:
        u = np.asarray(initial, dtype=float)
        if u.shape != (grid.points,):
            raise DomainError(f"initial state must have shape ({grid.points},), got {u.shape}")
        u = normalize(u, grid)
    else:
        if sigma0 is None:
            sigma0 = variational_sigma(coupling, branch)
        u = gaussian_state(grid, sigma0)

    base_step = config.step(grid)
    stepper = _semi_implicit_step if config.scheme == "semi-implicit" else _explicit_step
    if config.scheme == "explicit":
        bound = explicit_step_bound(grid, coupling, u)
        if base_step > bound:
            log.warning("explicit_step_unstable | dtau=%g bound=%g", base_step, bound)

    energy = radial_energy(u, grid, coupling)
    history: List[Dict[str, float]] = []
    collapse_radius = 2.0 * grid.spacing
    log.info(
        "relax_start | coupling=%g points=%d scheme=%s dtau=%g",
        coupling, grid.points, config.scheme, base_step,
    )

    def snapshot(it: int, converged: bool) -> RadialState:
        mu = chemical_potential(energy)
        return RadialState(
            grid=grid,
            coupling=coupling,
            u=u.copy(),
            norm=_inner(grid, u, u),
            energy=energy,
            mu=mu,
            residual=residual_norm(u, grid, coupling, mu),
            iterations=it,
            converged=converged,
            history=pd.DataFrame(history, columns=["iter", "energy", "residual"]),
        )

    for it in range(1, config.max_iters + 1):
        step = _capped_step(base_step, u, grid, coupling)
        candidate = stepper(u, grid, coupling, step)
        if not np.all(np.isfinite(candidate)):
            if coupling < 0.0:
                raise CollapseError(it, 0.0, -math.inf)
            raise ConvergenceError(f"relaxation diverged at iteration {it}", snapshot(it - 1, False))
        u = normalize(candidate, grid)
        previous = energy.total
        energy = radial_energy(u, grid, coupling)
        mu = chemical_potential(energy)
        res = residual_norm(u, grid, coupling, mu)
        history.append({"iter": it, "energy": energy.total, "residual": res})

        if coupling < 0.0:
            rms = rms_radius(u, grid)
            if rms < collapse_radius:
                log.warning("relax_collapse | iter=%d rms=%.6g energy=%.12g", it, rms, energy.total)
                raise CollapseError(it, rms, energy.total)

        if abs(previous - energy.total) < config.energy_tol and res < config.residual_tol:
            state = snapshot(it, True)
            log.info(
                "relax_converged | iters=%d energy=%.15g mu=%.15g residual=%.3g",
                it, energy.total, state.mu, res,
            )
            return state

    state = snapshot(config.max_iters, False)
    raise ConvergenceError(
        f"no convergence in {config.max_iters} iterations "
        f"(energy {energy.total:.15g}, residual {state.residual:.3g})",
        state,
    )
