"""
bec-stability command line.

Subcommands: energy, branches, sweep, critical, gpe, validate.

Exit codes: 0 ok, 2 invalid input, 3 collapse, 4 non-convergence,
5 validation mismatch.

Usage:
  bec-stability energy --model local --bN 1 --sigma 0.5
  bec-stability branches --model nonlocal --b -1e-4 --A 3 --Gamma 40 --N 100
  bec-stability sweep --model local --b -1 --sigma-min 0.2 --sigma-max 1 --steps 81 --format csv
  bec-stability critical --model local --a-s -0.005
  bec-stability gpe --bN 20 --profile out/profile.csv
  bec-stability validate --out out/validation.json
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
from scipy import constants
from tabulate import tabulate

from . import __version__
from .errors import (
    BracketError,
    CollapseError,
    ConfigError,
    ConvergenceError,
    DomainError,
    NumericalError,
)
from .gpe_radial import BRANCHES, SCHEMES, RadialGrid, RelaxConfig, gaussian_overlap, relax, variational_sigma, virial_residual
from .local_model import LocalModel, critical_point
from .nonlocal_model import NonlocalModel
from .oracle import DEFAULT_SEED
from .params import (
    CompositeKernel,
    ContactKernel,
    DimensionlessScale,
    InteractionKernel,
    ScreenedKernel,
    TrapGasParams,
    contact_strength_from_scattering,
    kernel_coefficients,
    kernel_from_dict,
    kernel_to_dict,
    load_config,
    to_dimensionless,
)
from .solver import DEFAULT_WINDOW, critical_scan, find_branches, sweep
from .validation import ValidationConfig, run_validation

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_COLLAPSE = 3
EXIT_NO_CONVERGENCE = 4
EXIT_MISMATCH = 5

Model = Union[LocalModel, NonlocalModel]

# -1e-4, -.5, -3: argparse (< 3.12) reads exponent forms as option strings
_NEGATIVE_NUMBER = re.compile(r"^-(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$")


# -------------------- logging & args -------------------- #
def _setup_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
        stream=sys.stderr,
    )


def _shared_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model")
    g.add_argument("--config", help="JSON parameter file; flags override its values")
    g.add_argument("--model", choices=("local", "nonlocal"))
    g.add_argument("--units", choices=("si", "oscillator"), help="Interpretation of inputs (default: oscillator)")
    g.add_argument("--b", type=float, help="Contact strength B")
    g.add_argument("--a-s", dest="a_s", type=float, help="Scattering length; sets B = 4 pi hbar^2 a_s / m")
    g.add_argument("--bN", dest="bN", type=float, help="Coupling b*N (sets b = bN, N = 1)")
    g.add_argument("--A", dest="A", type=float, help="Screened amplitude A >= 0")
    g.add_argument("--Gamma", dest="Gamma", type=float, help="Inverse screening length Gamma >= 0")
    g.add_argument("--N", dest="N", type=float, help="Boson number (default: 1)")
    g.add_argument("--mass", type=float)
    g.add_argument("--omega", type=float, help="Trap angular frequency")
    g.add_argument("--hbar", type=float)

    g = p.add_argument_group("sigma")
    g.add_argument("--sigma", type=float, help="Gaussian width")
    g.add_argument("--sigma-min", dest="sigma_min", type=float)
    g.add_argument("--sigma-max", dest="sigma_max", type=float)
    g.add_argument("--steps", type=int)
    g.add_argument("--spacing", choices=("linear", "log"), default="linear")

    g = p.add_argument_group("output")
    g.add_argument("--format", dest="fmt", choices=("json", "csv", "table"), default="json")
    g.add_argument("--out", help="Write output to PATH instead of stdout")
    g.add_argument("--no-header", dest="header", action="store_false", help="Omit run header (timestamp, config)")
    g.add_argument("--seed", type=int, default=DEFAULT_SEED)
    g.add_argument("--tol", type=float, help="Closed-form vs oracle tolerance (validate)")
    g.add_argument("--curve-tol", dest="curve_tol", type=float, help="N(sigma) tolerance (validate)")
    g.add_argument("--log", "--log-level", dest="log", default="WARNING",
                   help="Logging level (DEBUG, INFO, WARNING, ERROR)")
    return p


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_flags()
    p = argparse.ArgumentParser(
        prog="bec-stability",
        description="Stability analysis of a trapped Bose-Einstein condensate (Gaussian variational + radial GPE).",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("energy", parents=[shared], help="Energy breakdown at one width")
    sub.add_parser("branches", parents=[shared], help="Stationary widths at fixed N")
    sub.add_parser("sweep", parents=[shared], help="Stationary curve N(sigma)")
    sub.add_parser("critical", parents=[shared], help="Collapse threshold (sigma_min, N_max)")

    gpe = sub.add_parser("gpe", parents=[shared], help="Radial Gross-Pitaevskii relaxation (local model)")
    gpe.add_argument("--r-max", dest="r_max", type=float, default=8.0)
    gpe.add_argument("--points", type=int, default=4000)
    gpe.add_argument("--scheme", choices=SCHEMES, default="semi-implicit")
    gpe.add_argument("--dtau", type=float)
    gpe.add_argument("--max-iters", dest="max_iters", type=int, default=20000)
    gpe.add_argument("--energy-tol", dest="energy_tol", type=float, default=1e-12)
    gpe.add_argument("--residual-tol", dest="residual_tol", type=float, default=1e-8)
    gpe.add_argument("--branch", choices=BRANCHES, default="stable", help="Variational basin to start from")
    gpe.add_argument("--profile", help="Write converged profile CSV (r, psi, u)")
    gpe.add_argument("--history", help="Write convergence history CSV (iter, energy, residual)")

    val = sub.add_parser("validate", parents=[shared], help="Closed forms vs numerical oracles")
    val.add_argument("--mc-samples", dest="mc_samples", type=int, default=10**6)
    val.add_argument("--no-mc", dest="mc", action="store_false", help="Skip the Monte Carlo check")
    return p


# -------------------- run config -------------------- #
@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str
    units: str
    params: TrapGasParams
    kernel: InteractionKernel  # input units
    n: float
    sigma: Optional[float] = None
    sigma_min: Optional[float] = None
    sigma_max: Optional[float] = None
    steps: Optional[int] = None
    spacing: str = "linear"
    fmt: str = "json"
    out: Optional[str] = None
    header: bool = True
    seed: int = DEFAULT_SEED
    tol: Optional[float] = None
    curve_tol: Optional[float] = None
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def scale(self) -> DimensionlessScale:
        return DimensionlessScale.from_params(self.params)

    def reduced(self) -> Tuple[float, float, float]:
        _, kernel = to_dimensionless(self.params, self.kernel)
        return kernel_coefficients(kernel)

    def length(self, value: float) -> float:
        return value if self.units == "oscillator" else self.scale.length_from_si(value)

    def build_model(self, n: Optional[float] = None) -> Model:
        b, a, gamma = self.reduced()
        n = self.n if n is None else n
        if self.model == "local":
            return LocalModel(b=b, n=n)
        return NonlocalModel(b=b, a=a, gamma=gamma, n=n)

    def effective(self) -> Dict[str, Any]:
        out = {
            "model": self.model,
            "units": self.units,
            "mass": self.params.mass,
            "omega": self.params.trap_frequency,
            "hbar": self.params.hbar,
            "a_s": self.params.scattering_length,
            "kernel": kernel_to_dict(self.kernel),
            "N": self.n,
            "sigma": self.sigma,
            "sigma_min": self.sigma_min,
            "sigma_max": self.sigma_max,
            "steps": self.steps,
            "spacing": self.spacing,
            "seed": self.seed,
            "tol": self.tol,
            "curve_tol": self.curve_tol,
        }
        out.update(self.extras)
        return out


def _first(*values: Any) -> Any:
    return next((v for v in values if v is not None), None)


def _positive(flag: str, value: Optional[float], required: bool = False) -> Optional[float]:
    if value is None:
        if required:
            raise ConfigError(flag, "is required")
        return None
    if not math.isfinite(value) or value <= 0.0:
        raise ConfigError(flag, f"must be > 0, got {value!r}")
    return value


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge the optional JSON file with command-line flags (flags win)."""
    file_cfg: Dict[str, Any] = load_config(args.config) if args.config else {}
    file_kernel = kernel_from_dict(file_cfg["kernel"]) if "kernel" in file_cfg else None

    units = _first(args.units, file_cfg.get("units"), "oscillator")
    if units == "oscillator":
        mass = _first(args.mass, file_cfg.get("mass"), 1.0)
        omega = _first(args.omega, file_cfg.get("omega"), 1.0)
        hbar = _first(args.hbar, file_cfg.get("hbar"), 1.0)
    else:
        mass = _positive("--mass", _first(args.mass, file_cfg.get("mass")), required=True)
        omega = _positive("--omega", _first(args.omega, file_cfg.get("omega")), required=True)
        hbar = _first(args.hbar, file_cfg.get("hbar"), constants.hbar)
    a_s = _first(args.a_s, file_cfg.get("a_s"), 0.0)
    try:
        params = TrapGasParams(float(mass), float(omega), float(hbar), float(a_s))
    except DomainError as e:
        raise ConfigError("--mass/--omega/--hbar", str(e)) from e

    default_model = "local"
    if file_kernel is not None and not isinstance(file_kernel, ContactKernel):
        default_model = "nonlocal"
    model = _first(args.model, file_cfg.get("model"), default_model)
    if model not in ("local", "nonlocal"):
        raise ConfigError("--model", f"must be 'local' or 'nonlocal', got {model!r}")

    fb, fa, fg = kernel_coefficients(file_kernel) if file_kernel is not None else (None, None, None)
    if args.b is not None and args.a_s is not None:
        raise ConfigError("--b", "give either --b or --a-s, not both")
    if args.bN is not None and (args.N is not None or args.b is not None):
        raise ConfigError("--bN", "cannot be combined with --b or --N")

    if args.bN is not None:
        b, n = args.bN, 1.0
    else:
        if args.b is not None:
            b = args.b
        elif args.a_s is not None:
            b = contact_strength_from_scattering(params)
        elif fb is not None and file_kernel is not None and not isinstance(file_kernel, ScreenedKernel):
            b = fb
        else:
            b = contact_strength_from_scattering(params)
        n = _first(args.N, file_cfg.get("N"), 1.0)
    if not math.isfinite(n) or n < 0.0:
        raise ConfigError("--N", f"must be >= 0, got {n!r}")

    a = _first(args.A, fa, 0.0)
    gamma = _first(args.Gamma, fg, 0.0)
    if model == "local" and (a != 0.0 or args.Gamma is not None):
        raise ConfigError("--A", "screened parameters require --model nonlocal")
    try:
        kernel: InteractionKernel = (
            ContactKernel(float(b)) if model == "local"
            else CompositeKernel(ContactKernel(float(b)), ScreenedKernel(float(a), float(gamma)))
        )
    except DomainError as e:
        flag = "--Gamma" if "Gamma" in str(e) else "--A" if "amplitude" in str(e) else "--b"
        raise ConfigError(flag, str(e)) from e

    sigma = _first(args.sigma, file_cfg.get("sigma"))
    _positive("--sigma", sigma)
    _positive("--sigma-min", args.sigma_min)
    _positive("--sigma-max", args.sigma_max)
    if args.steps is not None and args.steps < 2:
        raise ConfigError("--steps", f"must be >= 2, got {args.steps!r}")
    _positive("--tol", args.tol)
    _positive("--curve-tol", args.curve_tol)

    extras: Dict[str, Any] = {}
    if args.command == "gpe":
        extras = {k: getattr(args, k) for k in (
            "r_max", "points", "scheme", "dtau", "max_iters", "energy_tol", "residual_tol", "branch",
        )}
    elif args.command == "validate":
        extras = {"mc_samples": args.mc_samples, "mc": args.mc}
    out_paths = {k: getattr(args, k, None) for k in ("profile", "history")}

    cfg = RunConfig(
        command=args.command,
        model=model,
        units=units,
        params=params,
        kernel=kernel,
        n=float(n),
        sigma=sigma,
        sigma_min=args.sigma_min,
        sigma_max=args.sigma_max,
        steps=args.steps,
        spacing=args.spacing,
        fmt=args.fmt,
        out=args.out,
        header=args.header,
        seed=args.seed,
        tol=args.tol,
        curve_tol=args.curve_tol,
        extras={**extras, **{k: v for k, v in out_paths.items() if v}},
    )
    log.info("run_config", extra={"config": cfg.effective()})
    return cfg


# -------------------- output -------------------- #
def _jsonable(obj: Any) -> Any:
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _header(cfg: RunConfig) -> Dict[str, Any]:
    return {
        "tool": "bec-stability",
        "version": __version__,
        "command": cfg.command,
        "generated": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": cfg.effective(),
    }


def _render(cfg: RunConfig, data: Union[Dict[str, Any], List[Dict[str, Any]]], frame: pd.DataFrame) -> str:
    if cfg.fmt == "json":
        payload: Dict[str, Any] = {"data": data}
        if cfg.header:
            payload = {"header": _header(cfg), "data": data}
        return json.dumps(_jsonable(payload), indent=2) + "\n"
    if cfg.fmt == "csv":
        body = frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
        if not cfg.header:
            return body
        head = _header(cfg)
        lines = [
            f"# {head['tool']} {head['version']} {head['command']}",
            f"# generated: {head['generated']}",
            f"# config: {json.dumps(_jsonable(head['config']), sort_keys=True)}",
        ]
        return "\n".join(lines) + "\n" + body
    body = tabulate(frame, headers="keys", tablefmt="github", floatfmt=".12g", showindex=False)
    return body + "\n"


def _emit(cfg: RunConfig, data: Union[Dict[str, Any], List[Dict[str, Any]]]) -> None:
    frame = pd.DataFrame(data if isinstance(data, list) else [data])
    text = _render(cfg, data, frame)
    if cfg.out:
        path = Path(cfg.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        log.info("output_written | path=%s bytes=%d", path, len(text))
    else:
        sys.stdout.write(text)


def _with_si(cfg: RunConfig, record: Dict[str, Any]) -> Dict[str, Any]:
    """Append SI columns next to the oscillator-unit ones."""
    if cfg.units != "si":
        return record
    scale = cfg.scale
    out = dict(record)
    for key, value in record.items():
        if not isinstance(value, float):
            continue
        if key.startswith("sigma"):
            out[f"{key}_si"] = scale.length_to_si(value)
        elif key.startswith("e_") or key in ("mu",):
            out[f"{key}_si"] = scale.energy_to_si(value)
    return out


# -------------------- commands -------------------- #
def cmd_energy(cfg: RunConfig) -> int:
    if cfg.sigma is None:
        raise ConfigError("--sigma", "is required")
    sigma = cfg.length(cfg.sigma)
    model = cfg.build_model()
    energy = model.energy(sigma)
    record = {
        **model.describe(),
        "sigma": sigma,
        **energy.as_dict(),
        "denergy_dsigma": model.denergy_dsigma(sigma),
    }
    _emit(cfg, _with_si(cfg, record))
    return EXIT_OK


def _window(cfg: RunConfig, default: Tuple[float, float]) -> Tuple[float, float]:
    lo = cfg.length(cfg.sigma_min) if cfg.sigma_min is not None else default[0]
    hi = cfg.length(cfg.sigma_max) if cfg.sigma_max is not None else default[1]
    if not lo < hi:
        raise ConfigError("--sigma-min/--sigma-max", f"empty range [{lo!r}, {hi!r}]")
    return lo, hi


def cmd_branches(cfg: RunConfig) -> int:
    window = _window(cfg, DEFAULT_WINDOW)
    model = cfg.build_model()
    points = find_branches(model, window=window)
    rows = [_with_si(cfg, {"n": model.n, **p.as_dict()}) for p in points]
    log.info("branches | count=%d", len(rows))
    _emit(cfg, rows)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    lo, hi = _window(cfg, (0.2, 3.0))
    curve = sweep(cfg.build_model(), (lo, hi), cfg.steps or 200, cfg.spacing)
    _emit(cfg, [_with_si(cfg, r) for r in curve.to_records()])
    return EXIT_OK


def cmd_critical(cfg: RunConfig) -> int:
    model = cfg.build_model()
    if not model.attractive:
        raise ConfigError("--b", "critical point needs attractive coupling (b < 0 or A > 0)")
    window = _window(cfg, DEFAULT_WINDOW)
    scan = critical_scan(model, window=window)
    record: Dict[str, Any] = {**model.describe()}
    record.pop("N", None)
    if isinstance(model, LocalModel):
        exact = critical_point(model.b)
        record.update(
            sigma_min=exact.sigma_min,
            n_max=exact.n_max,
            n_max_bosons=exact.n_max_bosons,
            n_max_abs_a_s=exact.n_max * abs(model.b) / (4.0 * math.pi),
            sigma_min_scan=scan.sigma_min,
            n_max_scan=scan.n_max,
        )
    else:
        record.update(sigma_min=scan.sigma_min, n_max=scan.n_max, n_max_bosons=scan.n_max_bosons)
    _emit(cfg, _with_si(cfg, record))
    return EXIT_OK


def cmd_gpe(cfg: RunConfig) -> int:
    if cfg.model != "local":
        raise ConfigError("--model", "gpe supports the local model only")
    x = cfg.extras
    try:
        grid = RadialGrid(r_max=x["r_max"], points=x["points"])
        config = RelaxConfig(
            dtau=x["dtau"], max_iters=x["max_iters"], energy_tol=x["energy_tol"],
            residual_tol=x["residual_tol"], scheme=x["scheme"],
        )
    except DomainError as e:
        raise ConfigError("--points/--r-max/--dtau", str(e)) from e
    b, _, _ = cfg.reduced()
    coupling = b * cfg.n
    sigma0 = variational_sigma(coupling, x["branch"])
    base = {"coupling": coupling, "branch": x["branch"], "initial_sigma": sigma0}

    try:
        state = relax(coupling, grid, config, sigma0=sigma0)
    except CollapseError as e:
        log.warning("gpe_collapse | %s", e)
        _emit(cfg, {**base, "status": "collapse", "iteration": e.iteration,
                    "rms_radius": e.rms_radius, "e_total": e.energy})
        return EXIT_COLLAPSE
    except ConvergenceError as e:
        partial = e.state
        _emit(cfg, {**base, "status": "no-convergence",
                    "iterations": partial.iterations if partial is not None else None,
                    "e_total": partial.energy.total if partial is not None else None,
                    "residual": partial.residual if partial is not None else None})
        return EXIT_NO_CONVERGENCE

    variational = LocalModel(b=coupling, n=1.0)
    minima = [p for p in find_branches(variational) if p.kind == "minimum"]
    e_var = min((p.energy.total for p in minima), default=math.nan)
    bound = "pass" if math.isfinite(e_var) and state.energy.total <= e_var + 1e-10 else "fail"
    record = {
        **base,
        "status": "converged",
        **state.energy.as_dict(),
        "mu": state.mu,
        "virial_residual": virial_residual(state),
        "residual": state.residual,
        "norm": state.norm,
        "iterations": state.iterations,
        "gaussian_overlap": gaussian_overlap(state, sigma0),
        "e_variational_min": e_var,
        "variational_bound": bound if math.isfinite(e_var) else "n/a",
    }
    if "profile" in x:
        state.profile_frame().to_csv(x["profile"], index=False, float_format="%.17g")
    if "history" in x:
        state.history.to_csv(x["history"], index=False, float_format="%.17g")
    _emit(cfg, _with_si(cfg, record))
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    vc = ValidationConfig(
        tol=cfg.tol if cfg.tol is not None else ValidationConfig.tol,
        curve_tol=cfg.curve_tol if cfg.curve_tol is not None else ValidationConfig.curve_tol,
        seed=cfg.seed,
        mc_samples=cfg.extras.get("mc_samples", 10**6),
    )
    report = run_validation(vc, include_mc=cfg.extras.get("mc", True))
    if cfg.fmt == "json":
        _emit(cfg, report.as_dict())
    else:
        frame_rows = report.to_frame().to_dict(orient="records")
        _emit(cfg, frame_rows)
    summary = report.summary()
    log.info("validate | passed=%s failures=%d variant=%s",
             summary["passed"], summary["failures"], summary["resolved_erfc_variant"])
    return EXIT_OK if report.passed else EXIT_MISMATCH


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "energy": cmd_energy,
    "branches": cmd_branches,
    "sweep": cmd_sweep,
    "critical": cmd_critical,
    "gpe": cmd_gpe,
    "validate": cmd_validate,
}


def _glue_negative_values(argv: Sequence[str]) -> List[str]:
    """Rewrite `--flag -1e-4` as `--flag=-1e-4`."""
    out: List[str] = []
    for tok in argv:
        if out and _NEGATIVE_NUMBER.match(tok) and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    raw = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_negative_values(raw))
    _setup_logging(args.log)
    try:
        cfg = build_run_config(args)
        return COMMANDS[cfg.command](cfg)
    except (DomainError, BracketError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except CollapseError as e:
        print(f"collapse: {e}", file=sys.stderr)
        return EXIT_COLLAPSE
    except (ConvergenceError, NumericalError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    raise SystemExit(main())
