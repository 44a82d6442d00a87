"""
Root finding, branch classification, curve sweeps and critical-point scans
for one-dimensional variational models.

Works on any model exposing ``energy(sigma)``, ``denergy_dsigma(sigma)``,
``n_of_sigma(sigma)``, ``with_n(n)``, ``collapses``, ``attractive`` and
``describe()`` (LocalModel and NonlocalModel both do).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from .errors import BracketError, ConvergenceError, DomainError, NumericalError, PoleError
from .local_model import CriticalPoint
from .oracle import fd_derivative
from .params import EnergyBreakdown

log = logging.getLogger(__name__)

DEFAULT_WINDOW = (1e-3, 10.0)
SCAN_POINTS = 2000
ROOT_TOL = 1e-12
DEGENERATE_CURVATURE = 1e-8
CURVATURE_STEP = 1e-4  # relative to sigma
_TOUCH_RTOL = 1e-9
_MERGE_DISTANCE = 1e-6

CURVE_COLUMNS = ["sigma", "n", "e_total", "e_kin", "e_trap", "e_int", "kind"]


class VariationalModel(Protocol):
    n: float

    @property
    def collapses(self) -> bool: ...

    @property
    def attractive(self) -> bool: ...

    def energy(self, sigma: Any) -> EnergyBreakdown: ...

    def denergy_dsigma(self, sigma: Any) -> float: ...

    def n_of_sigma(self, sigma: Any) -> float: ...

    def with_n(self, n: float) -> "VariationalModel": ...

    def describe(self) -> Dict[str, Any]: ...


@dataclass(frozen=True)
class StationaryPoint:
    sigma: float
    energy: EnergyBreakdown
    kind: str  # minimum | maximum | degenerate
    stability: str  # stable | metastable | unstable
    curvature: float = float("nan")
    label: str = ""

    def as_dict(self) -> Dict[str, Any]:
        return {
            "sigma": self.sigma,
            **self.energy.as_dict(),
            "kind": self.kind,
            "stability": self.stability,
            "label": self.label,
            "curvature": self.curvature,
        }


@dataclass(frozen=True)
class BranchPoint:
    sigma: float
    n: float
    energy: Optional[EnergyBreakdown]
    kind: str  # minimum | maximum | degenerate | unphysical | pole

    def as_dict(self) -> Dict[str, Any]:
        e = self.energy.as_dict() if self.energy is not None else {
            "e_total": math.nan, "e_kin": math.nan, "e_trap": math.nan, "e_int": math.nan,
        }
        return {"sigma": self.sigma, "n": self.n, **e, "kind": self.kind}


@dataclass(frozen=True)
class BranchCurve:
    points: Tuple[BranchPoint, ...]
    model: Dict[str, Any]

    def __post_init__(self) -> None:
        sig = [p.sigma for p in self.points]
        if any(b <= a for a, b in zip(sig, sig[1:])):
            raise DomainError("branch curve sigma values must be strictly increasing")

    def to_records(self) -> List[Dict[str, Any]]:
        return [p.as_dict() for p in self.points]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.to_records(), columns=CURVE_COLUMNS)


def _check_window(window: Sequence[float]) -> Tuple[float, float]:
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo <= 0.0 or hi <= lo:
        raise DomainError(f"sigma window must satisfy 0 < lo < hi, got ({lo!r}, {hi!r})")
    return lo, hi


def find_root(
    f: Callable[[float], float], bracket: Sequence[float], tol: float = ROOT_TOL
) -> float:
    """Brent's method on a sign-changing bracket; never leaves the bracket."""
    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if not (math.isfinite(flo) and math.isfinite(fhi)) or flo * fhi > 0.0:
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]: f={flo!r}, {fhi!r}")
    try:
        root, info = optimize.brentq(f, lo, hi, xtol=tol, maxiter=500, full_output=True)
    except RuntimeError as e:
        raise ConvergenceError(f"root refinement failed on [{lo!r}, {hi!r}]: {e}") from e
    log.debug("root | bracket=[%g, %g] root=%.16g iters=%d", lo, hi, root, info.iterations)
    return root


def curvature(model: VariationalModel, sigma: float) -> float:
    """d^2 eps / d sigma^2 as a Richardson difference of the analytic slope."""
    return fd_derivative(model.denergy_dsigma, sigma, h=CURVATURE_STEP * sigma).value


def classify(model: VariationalModel, sigma: float) -> Tuple[str, float]:
    c = curvature(model, sigma)
    if abs(c) < DEGENERATE_CURVATURE:
        return "degenerate", c
    return ("minimum" if c > 0.0 else "maximum"), c


def _slope_scale(sigma: float) -> float:
    return 1.5 / sigma**3 + 1.5 * sigma


def _touch_points(model: VariationalModel, grid: np.ndarray, d: np.ndarray) -> List[float]:
    """Double roots: |slope| dips to zero without a sign change."""
    out = []
    for i in range(1, len(grid) - 1):
        if not (d[i - 1] * d[i] > 0.0 and d[i] * d[i + 1] > 0.0):
            continue
        if not (abs(d[i]) < abs(d[i - 1]) and abs(d[i]) <= abs(d[i + 1])):
            continue
        res = optimize.minimize_scalar(
            lambda s: abs(model.denergy_dsigma(s)),
            bounds=(grid[i - 1], grid[i + 1]),
            method="bounded",
            options={"xatol": 1e-13},
        )
        s = float(res.x)
        if abs(model.denergy_dsigma(s)) <= _TOUCH_RTOL * _slope_scale(s):
            out.append(s)
    return out


def _assign_stability(model: VariationalModel, points: List[Tuple[float, str, float]]) -> List[StationaryPoint]:
    energies = {s: model.energy(s) for s, _, _ in points}
    minima = [s for s, kind, _ in points if kind == "minimum"]
    ground = None
    if minima and not model.collapses:
        ground = min(minima, key=lambda s: energies[s].total)
    high_density = min(minima) if len(minima) > 1 else None

    result = []
    for s, kind, c in points:
        if kind == "minimum":
            stability = "stable" if s == ground else "metastable"
            label = "high-density" if s == high_density else "dilute"
        elif kind == "maximum":
            stability, label = "unstable", "barrier"
        else:
            stability, label = "unstable", "marginal"
        result.append(StationaryPoint(s, energies[s], kind, stability, c, label))
    return result


def find_branches(
    model: VariationalModel,
    n_target: Optional[float] = None,
    window: Sequence[float] = DEFAULT_WINDOW,
    scan_points: int = SCAN_POINTS,
    tol: float = ROOT_TOL,
) -> List[StationaryPoint]:
    """All stationary widths in the window, ordered by sigma and classified."""
    lo, hi = _check_window(window)
    if n_target is not None:
        model = model.with_n(n_target)
    if scan_points < 3:
        raise DomainError(f"scan_points must be >= 3, got {scan_points!r}")

    grid = np.linspace(lo, hi, scan_points)
    d = np.array([model.denergy_dsigma(s) for s in grid])

    found: List[Tuple[float, bool]] = []  # (sigma, forced degenerate)
    for i in range(len(grid) - 1):
        if d[i] == 0.0:
            found.append((float(grid[i]), False))
        elif d[i] * d[i + 1] < 0.0:
            found.append((find_root(model.denergy_dsigma, (grid[i], grid[i + 1]), tol), False))
    if d[-1] == 0.0:
        found.append((float(grid[-1]), False))
    found.extend((s, True) for s in _touch_points(model, grid, d))
    found.sort()

    merged: List[Tuple[float, bool]] = []
    for s, forced in found:
        if merged and s - merged[-1][0] < _MERGE_DISTANCE * max(1.0, s):
            prev = merged.pop()
            merged.append((0.5 * (prev[0] + s), True))
        else:
            merged.append((s, forced))

    classified = []
    for s, forced in merged:
        kind, c = classify(model, s)
        classified.append((s, "degenerate" if forced else kind, c))

    points = _assign_stability(model, classified)
    log.info(
        "branches_found | n=%.10g count=%d kinds=%s",
        model.n,
        len(points),
        [p.kind for p in points],
    )
    return points


def sweep(
    model: VariationalModel,
    sigma_range: Sequence[float],
    steps: int,
    spacing: str = "linear",
) -> BranchCurve:
    """Tabulate the stationary curve N(sigma) with energy and kind at each sigma."""
    lo, hi = _check_window(sigma_range)
    if steps < 2:
        raise DomainError(f"steps must be >= 2, got {steps!r}")
    if spacing == "linear":
        grid = np.linspace(lo, hi, steps)
    elif spacing == "log":
        grid = np.geomspace(lo, hi, steps)
    else:
        raise DomainError(f"spacing must be 'linear' or 'log', got {spacing!r}")

    rows = []
    for s in map(float, grid):
        try:
            n = model.n_of_sigma(s)
        except PoleError:
            rows.append(BranchPoint(s, math.nan, None, "pole"))
            continue
        if not math.isfinite(n) or n < 0.0:
            rows.append(BranchPoint(s, n, None, "unphysical"))
            continue
        at_n = model.with_n(n)
        kind, _ = classify(at_n, s)
        rows.append(BranchPoint(s, n, at_n.energy(s), kind))

    gaps = sum(1 for r in rows if r.kind in ("pole", "unphysical"))
    log.info("sweep_done | steps=%d spacing=%s gaps=%d", steps, spacing, gaps)
    return BranchCurve(points=tuple(rows), model=model.describe())


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10
) -> Tuple[float, float]:
    """Maximise f on a bracket whose interior golden point beats both ends."""
    mid = lo + (hi - lo) * 0.6180339887498949
    if not (f(mid) > f(lo) and f(mid) > f(hi)):
        mid = lo + (hi - lo) * 0.3819660112501051
        if not (f(mid) > f(lo) and f(mid) > f(hi)):
            raise BracketError(f"no interior maximum bracketed by [{lo!r}, {hi!r}]")
    res = optimize.minimize_scalar(lambda x: -f(x), bracket=(lo, mid, hi), method="golden", tol=tol)
    return float(res.x), -float(res.fun)


def _n_or_nan(model: VariationalModel, s: float) -> float:
    try:
        return model.n_of_sigma(s)
    except PoleError:
        return math.nan


def _refine_maximum(model: VariationalModel, lo: float, hi: float) -> Tuple[float, float]:
    def slope(s: float) -> float:
        return fd_derivative(model.n_of_sigma, s).value

    try:
        s = find_root(slope, (lo, hi))
        return s, model.n_of_sigma(s)
    except (BracketError, NumericalError, ConvergenceError):
        return golden_section_max(model.n_of_sigma, lo, hi)


def critical_scan(
    model: VariationalModel,
    window: Sequence[float] = DEFAULT_WINDOW,
    scan_points: int = SCAN_POINTS,
) -> CriticalPoint:
    """Largest local maximum of N(sigma) on the window: the collapse threshold."""
    if not model.attractive:
        raise DomainError("critical scan needs an attractive interaction")
    lo, hi = _check_window(window)
    grid = np.linspace(lo, hi, scan_points)
    ns = np.array([_n_or_nan(model, s) for s in grid])

    best: Optional[Tuple[float, float]] = None
    for i in range(1, len(grid) - 1):
        window3 = ns[i - 1 : i + 2]
        if not np.all(np.isfinite(window3)) or ns[i] <= 0.0:
            continue
        if ns[i] >= ns[i - 1] and ns[i] >= ns[i + 1]:
            s, n = _refine_maximum(model, float(grid[i - 1]), float(grid[i + 1]))
            log.debug("critical_candidate | sigma=%.12g n=%.12g", s, n)
            if best is None or n > best[1]:
                best = (s, n)
    if best is None:
        raise DomainError(f"N(sigma) has no positive interior maximum on [{lo!r}, {hi!r}]")
    log.info("critical_scan | sigma_min=%.16g n_max=%.16g", best[0], best[1])
    return CriticalPoint(sigma_min=best[0], n_max=best[1])
