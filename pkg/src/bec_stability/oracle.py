"""
Brute-force evaluation of the energy functional for the Gaussian ansatz.

Nothing here uses the closed forms of the model modules: integrals come from
scipy's QUADPACK (adaptive Gauss-Kronrod) or a composite Gauss-Legendre rule,
derivatives from Richardson-extrapolated central differences and the pair
integral from Monte Carlo sampling. These are the reference values the
closed forms are checked against.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError, NumericalError
from .params import GaussianAnsatz, EnergyBreakdown, InteractionKernel, kernel_coefficients

log = logging.getLogger(__name__)

DEFAULT_SEED = 20240531
QUAD_RULES = ("gauss-kronrod", "gauss-legendre")


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-15
    max_subdivisions: int = 200
    outer_radius: Optional[float] = None  # None -> cutoff * sigma
    cutoff: float = 12.0
    rule: str = "gauss-kronrod"
    legendre_panels: int = 24
    legendre_nodes: int = 24

    def __post_init__(self) -> None:
        if not self.rel_tol > 0.0 or self.abs_tol < 0.0:
            raise DomainError("quadrature tolerances must be rel_tol > 0, abs_tol >= 0")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if self.outer_radius is not None and not self.outer_radius > 0.0:
            raise DomainError("outer_radius must be > 0")
        if self.rule not in QUAD_RULES:
            raise DomainError(f"rule must be one of {QUAD_RULES}, got {self.rule!r}")

    def radius(self, sigma: float) -> float:
        return self.outer_radius if self.outer_radius is not None else self.cutoff * sigma


# -------------------- 1-D rules -------------------- #
def _quad(f: Callable[[float], float], lo: float, hi: float, spec: QuadratureSpec) -> float:
    out = integrate.quad(
        f,
        lo,
        hi,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    value, abserr = out[0], out[1]
    if len(out) > 3:
        raise ConvergenceError(
            f"quadrature on [{lo:.6g}, {hi:.6g}] failed: {out[3].splitlines()[0]}"
        )
    if not math.isfinite(value):
        raise ConvergenceError(f"quadrature on [{lo:.6g}, {hi:.6g}] is not finite")
    log.debug("quad | lo=%g hi=%g value=%.17g abserr=%.3g", lo, hi, value, abserr)
    return value


def _legendre(spec: QuadratureSpec, lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(spec.legendre_nodes)
    edges = np.linspace(lo, hi, spec.legendre_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _integrate(f: Callable, lo: float, hi: float, spec: QuadratureSpec) -> float:
    if spec.rule == "gauss-kronrod":
        return _quad(lambda r: float(f(r)), lo, hi, spec)
    nodes, weights = _legendre(spec, lo, hi)
    return math.fsum(weights * f(nodes))


# -------------------- energy functional -------------------- #
def quad_norm(sigma: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    psi = GaussianAnsatz(sigma)
    return _integrate(lambda r: 4.0 * math.pi * r * r * psi.density(r), 0.0, spec.radius(sigma), spec)


def _yukawa_inner(r: np.ndarray, rp: np.ndarray, gamma: float) -> np.ndarray:
    """Angular average of exp(-gamma s)/s for rp <= r, times 2 r rp."""
    if gamma == 0.0:
        return 2.0 * rp
    return np.exp(-gamma * (r - rp)) * -np.expm1(-2.0 * gamma * rp) / gamma


def quad_pair_integral(kernel: InteractionKernel, sigma: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """
    Pair integral of the kernel V(s) = b delta(s) - a exp(-gamma s)/s over |Psi|^2 |Psi'|^2.

    The screened part uses the exact angular average
        <exp(-gamma s)/s> = (exp(-gamma|r-r'|) - exp(-gamma(r+r'))) / (2 gamma r r')
    (1/max(r, r') at gamma = 0) and integrates the triangle r' <= r twice.
    """
    b, a, gamma = kernel_coefficients(kernel)
    psi = GaussianAnsatz(sigma)
    R = spec.radius(sigma)
    total = 0.0

    if b != 0.0:
        contact = _integrate(lambda r: 4.0 * math.pi * r * r * psi.density(r) ** 2, 0.0, R, spec)
        total += b * contact

    if a != 0.0:
        # (4 pi)^2 r^2 r'^2 / (2 r r') = 8 pi^2 r r'
        def weight(r, rp):
            return 8.0 * math.pi**2 * r * rp * psi.density(r) * psi.density(rp) * _yukawa_inner(r, rp, gamma)

        if spec.rule == "gauss-kronrod":

            def outer(r: float) -> float:
                if r == 0.0:
                    return 0.0
                return _quad(lambda rp: float(weight(r, rp)), 0.0, r, spec)

            screened = 2.0 * _quad(outer, 0.0, R, spec)
        else:
            rn, rw = _legendre(spec, 0.0, R)
            tn, tw = np.polynomial.legendre.leggauss(spec.legendre_nodes)
            # map r' = r * (1 + t) / 2 onto [0, r] for every outer node
            rp = rn[:, None] * 0.5 * (1.0 + tn[None, :])
            inner = (weight(rn[:, None], rp) * tw[None, :]).sum(axis=1) * 0.5 * rn
            screened = 2.0 * math.fsum(rw * inner)
        total -= a * screened

    return total


def quad_energy(
    kernel: InteractionKernel, n: float, sigma: float, spec: QuadratureSpec = QuadratureSpec()
) -> EnergyBreakdown:
    """Energy per particle of the Gaussian ansatz by direct radial quadrature."""
    psi = GaussianAnsatz(sigma)
    R = spec.radius(sigma)
    s2 = sigma * sigma

    def kinetic(r):
        # |grad Psi|^2 = (r / sigma^2)^2 |Psi|^2
        return 4.0 * math.pi * r * r * 0.5 * (r * r / (s2 * s2)) * psi.density(r)

    def trap(r):
        return 4.0 * math.pi * r * r * 0.5 * r * r * psi.density(r)

    pair = quad_pair_integral(kernel, sigma, spec)
    return EnergyBreakdown(
        kinetic=_integrate(kinetic, 0.0, R, spec),
        trap=_integrate(trap, 0.0, R, spec),
        interaction=0.5 * n * pair,
    )


# -------------------- finite differences -------------------- #
@dataclass(frozen=True)
class FiniteDifference:
    value: float
    error: float


def fd_derivative(
    f: Callable[[float], float],
    x: float,
    order: int = 1,
    h: Optional[float] = None,
    levels: int = 3,
) -> FiniteDifference:
    """Central difference of order 1 or 2 refined by Richardson extrapolation in h^2."""
    if order not in (1, 2):
        raise DomainError(f"order must be 1 or 2, got {order!r}")
    if h is None:
        h = (1e-3 if order == 1 else 1e-2) * (abs(x) if x != 0.0 else 1.0)
    if not h > 0.0:
        raise DomainError(f"step must be > 0, got {h!r}")

    def sample(t: float) -> float:
        v = f(t)
        if not math.isfinite(v):
            raise NumericalError(f"non-finite sample f({t!r}) = {v!r}")
        return v

    f0 = sample(x) if order == 2 else 0.0
    table = []
    step = h
    for i in range(levels):
        fp, fm = sample(x + step), sample(x - step)
        if order == 1:
            row = [(fp - fm) / (2.0 * step)]
        else:
            row = [(fp - 2.0 * f0 + fm) / (step * step)]
        for j in range(1, i + 1):
            factor = 4.0**j
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (factor - 1.0))
        table.append(row)
        step *= 0.5
    value = table[-1][-1]
    error = abs(value - table[-2][-2]) if levels > 1 else float("nan")
    return FiniteDifference(value=value, error=error)


# -------------------- Monte Carlo -------------------- #
@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    samples: int


def mc_pair_integral(
    kernel: InteractionKernel,
    sigma: float,
    samples: int = 10**6,
    seed: int = DEFAULT_SEED,
    chunk: int = 1 << 17,
) -> MonteCarloEstimate:
    """Pair integral of the screened kernel, sampling both positions from |Psi|^2."""
    b, a, gamma = kernel_coefficients(kernel)
    if b != 0.0:
        raise DomainError("contact part (delta function) cannot be Monte Carlo sampled")
    if samples < 10**4:
        raise DomainError(f"samples must be >= 10^4, got {samples!r}")
    GaussianAnsatz(sigma)

    rng = np.random.default_rng(seed)
    # |Psi|^2 is a normal density with variance sigma^2 / 2 per coordinate
    scale = sigma / math.sqrt(2.0)
    sums, squares = [], []
    remaining = samples
    while remaining > 0:
        m = min(chunk, remaining)
        r1 = rng.normal(0.0, scale, size=(m, 3))
        r2 = rng.normal(0.0, scale, size=(m, 3))
        s = np.linalg.norm(r1 - r2, axis=1)
        v = -a * np.exp(-gamma * s) / s
        sums.append(float(v.sum()))
        squares.append(float((v * v).sum()))
        remaining -= m

    mean = math.fsum(sums) / samples
    var = max(math.fsum(squares) / samples - mean * mean, 0.0) * samples / (samples - 1)
    est = MonteCarloEstimate(value=mean, stderr=math.sqrt(var / samples), samples=samples)
    log.info("mc_pair_integral | samples=%d value=%.10g stderr=%.3g", samples, est.value, est.stderr)
    return est
