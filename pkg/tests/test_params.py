from __future__ import annotations

import json
import math
from pathlib import Path

import pytest
from scipy import constants

from bec_stability.errors import ConfigError, DomainError
from bec_stability.local_model import LocalModel
from bec_stability.params import (
    CompositeKernel,
    ContactKernel,
    DimensionlessScale,
    EnergyBreakdown,
    GaussianAnsatz,
    ScreenedKernel,
    TrapGasParams,
    contact_strength_from_scattering,
    from_dimensionless,
    kernel_coefficients,
    kernel_from_dict,
    kernel_to_dict,
    load_config,
    to_dimensionless,
)

RB87_MASS = 1.443160648e-25  # kg
TRAP_OMEGA = 2.0 * math.pi * 100.0  # rad/s


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _rb87(a_s: float = 5.3e-9) -> TrapGasParams:
    return TrapGasParams(RB87_MASS, TRAP_OMEGA, constants.hbar, a_s)


def test_oscillator_units_are_identity() -> None:
    params = TrapGasParams.oscillator()
    kernel = CompositeKernel(ContactKernel(-0.3), ScreenedKernel(2.0, 5.0))
    scale, reduced = to_dimensionless(params, kernel)
    assert scale.length_unit == 1.0 and scale.energy_unit == 1.0
    assert kernel_coefficients(reduced) == (-0.3, 2.0, 5.0)


def test_si_round_trip() -> None:
    params = _rb87()
    kernel = CompositeKernel(
        ContactKernel(contact_strength_from_scattering(params)),
        ScreenedKernel(3.1e-31, 2.5e6),
    )
    scale, reduced = to_dimensionless(params, kernel)
    back = kernel_coefficients(from_dimensionless(scale, reduced))
    for got, want in zip(back, kernel_coefficients(kernel)):
        assert math.isclose(got, want, rel_tol=1e-12)


def test_oscillator_length_of_rb87_trap() -> None:
    scale = DimensionlessScale.from_params(_rb87())
    # sqrt(hbar / (m omega)) for a 100 Hz trap is about 1.08 micrometres
    assert 1.07e-6 < scale.length_unit < 1.09e-6
    assert math.isclose(scale.energy_unit, constants.hbar * TRAP_OMEGA, rel_tol=1e-15)
    assert math.isclose(scale.length_from_si(scale.length_to_si(0.37)), 0.37, rel_tol=1e-15)


def test_contact_strength_from_scattering_length() -> None:
    assert math.isclose(
        contact_strength_from_scattering(TrapGasParams.oscillator(-0.005)),
        -0.062831853071795868,
        rel_tol=1e-15,
    )
    params = _rb87()
    scale, reduced = to_dimensionless(params, ContactKernel(contact_strength_from_scattering(params)))
    # reduced contact strength is 4 pi a_s / a_ho
    assert math.isclose(reduced.b, 4.0 * math.pi * 5.3e-9 / scale.length_unit, rel_tol=1e-12)


def test_energy_is_dimensionally_homogeneous() -> None:
    params = _rb87()
    scale = DimensionlessScale.from_params(params)
    b_si = contact_strength_from_scattering(params)
    n = 1e4
    sigma_si = 1.2 * scale.length_unit
    hbar, m, w = params.hbar, params.mass, params.trap_frequency

    kinetic = 3.0 * hbar**2 / (4.0 * m * sigma_si**2)
    trap = 0.75 * m * w**2 * sigma_si**2
    interaction = b_si * n / (2.0 * (2.0 * math.pi) ** 1.5 * sigma_si**3)

    _, reduced = to_dimensionless(params, ContactKernel(b_si))
    e = LocalModel(b=reduced.b, n=n).energy(scale.length_from_si(sigma_si))
    assert math.isclose(scale.energy_to_si(e.kinetic), kinetic, rel_tol=1e-10)
    assert math.isclose(scale.energy_to_si(e.trap), trap, rel_tol=1e-10)
    assert math.isclose(scale.energy_to_si(e.interaction), interaction, rel_tol=1e-10)


def test_invalid_trap_parameters() -> None:
    for bad in ({"mass": 0.0}, {"trap_frequency": -1.0}, {"hbar": math.nan}):
        kwargs = {"mass": 1.0, "trap_frequency": 1.0, "hbar": 1.0, **bad}
        with pytest.raises(DomainError):
            TrapGasParams(**kwargs)
    with pytest.raises(DomainError):
        TrapGasParams(1.0, 1.0, 1.0, math.inf)


def test_kernel_validation_and_degeneracy() -> None:
    with pytest.raises(DomainError):
        ScreenedKernel(-1.0, 1.0)
    with pytest.raises(DomainError):
        ScreenedKernel(1.0, -1.0)
    composite = CompositeKernel(ContactKernel(0.7), ScreenedKernel(0.0, 3.0))
    assert kernel_coefficients(composite)[:2] == kernel_coefficients(ContactKernel(0.7))[:2]


def test_kernel_dict_round_trip() -> None:
    for kernel in (ContactKernel(-1.0), ScreenedKernel(2.0, 0.5), CompositeKernel(ContactKernel(1.0), ScreenedKernel(3.0, 40.0))):
        assert kernel_from_dict(kernel_to_dict(kernel)) == kernel

    try:
        kernel_from_dict({"type": "dipolar"})
        assert False, "Expected ConfigError for unknown kernel type"
    except ConfigError as e:
        assert e.flag == "kernel.type"
    with pytest.raises(ConfigError):
        kernel_from_dict({"type": "screened", "A": "lots"})
    with pytest.raises(ConfigError):
        kernel_from_dict({"type": "screened", "A": -2.0})


def test_gaussian_ansatz() -> None:
    psi = GaussianAnsatz(0.8)
    assert math.isclose(float(psi.wavefunction(0.3)) ** 2, float(psi.density(0.3)), rel_tol=1e-14)
    with pytest.raises(DomainError):
        GaussianAnsatz(0.0)
    with pytest.raises(DomainError):
        GaussianAnsatz(-1.0)


def test_energy_breakdown() -> None:
    e = EnergyBreakdown(kinetic=0.75, trap=0.75, interaction=-0.2)
    assert e.total == 0.75 + 0.75 - 0.2
    assert math.isclose(e.virial(), 3.0 * -0.2)
    assert e.scaled(2.0).total == pytest.approx(2.0 * e.total)
    assert list(e.as_dict()) == ["e_total", "e_kin", "e_trap", "e_int"]


def test_load_config_happy_path(tmp_path: Path) -> None:
    p = tmp_path / "trap.json"
    _write(p, json.dumps({"units": "oscillator", "N": 100, "kernel": {"type": "contact", "B": -1.0}}))
    cfg = load_config(p)
    assert cfg["N"] == 100
    assert kernel_from_dict(cfg["kernel"]) == ContactKernel(-1.0)


def test_load_config_errors(tmp_path: Path) -> None:
    missing = tmp_path / "nope.json"
    try:
        load_config(missing)
        assert False, "Expected ConfigError for missing file"
    except ConfigError as e:
        assert "file not found" in str(e)

    bad = tmp_path / "bad.json"
    _write(bad, "{not json")
    with pytest.raises(ConfigError):
        load_config(bad)

    extra = tmp_path / "extra.json"
    _write(extra, json.dumps({"N": 1, "temperature": 0.0}))
    try:
        load_config(extra)
        assert False, "Expected ConfigError for unknown key"
    except ConfigError as e:
        assert "temperature" in str(e)

    units = tmp_path / "units.json"
    _write(units, json.dumps({"units": "cgs"}))
    with pytest.raises(ConfigError):
        load_config(units)
