from __future__ import annotations

import logging
import math

import numpy as np
import pytest

from bec_stability.errors import CollapseError, ConvergenceError, DomainError
from bec_stability.gpe_radial import (
    RadialGrid,
    RelaxConfig,
    explicit_step_bound,
    gaussian_overlap,
    gaussian_state,
    radial_energy,
    relax,
    variational_sigma,
    virial_residual,
)
from bec_stability.local_model import SIGMA_MIN, LocalModel, critical_point
from bec_stability.solver import find_branches

N_MAX = critical_point(-1.0).n_max  # threshold of b*N in oscillator units


def _variational_minimum(coupling: float) -> float:
    minima = [p for p in find_branches(LocalModel(b=coupling, n=1.0)) if p.kind == "minimum"]
    return min(p.energy.total for p in minima)


def test_ideal_gas_ground_state() -> None:
    state = relax(0.0)
    assert state.converged
    assert abs(state.energy.total - 1.5) < 1e-5
    assert abs(state.mu - 1.5) < 1e-5
    assert abs(state.norm - 1.0) < 1e-12
    assert state.residual < 1e-8
    assert gaussian_overlap(state) > 1.0 - 1e-8


def test_ideal_gas_virial_on_fine_grid() -> None:
    state = relax(0.0, RadialGrid(points=48_000), RelaxConfig(residual_tol=1e-7))
    assert virial_residual(state) < 1e-8


@pytest.mark.parametrize("coupling", [1.0, 5.0, 20.0, 50.0])
def test_repulsive_ground_state_beats_gaussian(coupling: float) -> None:
    state = relax(coupling, RadialGrid(points=8000))
    assert state.converged
    assert state.energy.total <= _variational_minimum(coupling) + 1e-10
    assert virial_residual(state) < 1e-6
    assert state.mu >= state.energy.total


def test_repulsive_energy_regression_values() -> None:
    assert math.isclose(relax(20.0).energy.total, 1.9501032556, rel_tol=1e-7)
    assert math.isclose(relax(50.0).energy.total, 2.3734290437, rel_tol=1e-7)


def test_grid_refinement_changes_energy_little() -> None:
    coarse = relax(20.0, RadialGrid(points=4000))
    fine = relax(20.0, RadialGrid(points=8000))
    assert abs(coarse.energy.total - fine.energy.total) / fine.energy.total < 1e-6


def test_energy_history_is_monotone() -> None:
    state = relax(20.0, RadialGrid(points=1000))
    energies = state.history["energy"].to_numpy()
    assert len(energies) == state.iterations
    assert (np.diff(energies) <= 1e-12).all()


def test_explicit_and_semi_implicit_agree() -> None:
    grid = RadialGrid(points=128)
    implicit = relax(5.0, grid)
    explicit = relax(5.0, grid, RelaxConfig(scheme="explicit"))
    assert explicit.iterations > implicit.iterations
    assert abs(explicit.energy.total - implicit.energy.total) < 1e-9


def test_explicit_bound_includes_nonlinear_term(caplog: pytest.LogCaptureFixture) -> None:
    grid = RadialGrid(points=128)
    u0 = gaussian_state(grid, 1.0)
    linear = explicit_step_bound(grid, 0.0, u0)
    assert math.isclose(linear, grid.spacing**2 / (2.0 + 0.5 * grid.spacing**2 * grid.r_max**2), rel_tol=1e-14)
    assert explicit_step_bound(grid, 200.0, u0) < 0.99 * linear
    assert explicit_step_bound(grid, -200.0, u0) == explicit_step_bound(grid, 200.0, u0)

    config = RelaxConfig(scheme="explicit", dtau=0.99 * linear, max_iters=1)
    with caplog.at_level(logging.WARNING, logger="bec_stability.gpe_radial"):
        with pytest.raises(ConvergenceError):
            relax(0.0, grid, config, sigma0=1.0)
    assert "explicit_step_unstable" not in caplog.text

    with caplog.at_level(logging.WARNING, logger="bec_stability.gpe_radial"):
        with pytest.raises(ConvergenceError):
            relax(200.0, grid, config, sigma0=1.0)
    assert "explicit_step_unstable" in caplog.text


def test_attractive_metastable_state() -> None:
    coupling = -0.5 * N_MAX
    state = relax(coupling)
    assert state.converged
    assert math.isclose(state.energy.total, 1.3445416936, rel_tol=1e-8)
    assert virial_residual(state) < 1e-5
    assert state.energy.total <= _variational_minimum(coupling) + 1e-10


def test_attractive_collapse_beyond_threshold() -> None:
    try:
        relax(-2.0 * N_MAX, sigma0=SIGMA_MIN)
        assert False, "Expected CollapseError above the critical coupling"
    except CollapseError as e:
        assert e.iteration > 0
        assert e.rms_radius < 2.0 * RadialGrid().spacing


def test_unconverged_state_fails_virial() -> None:
    grid = RadialGrid(points=256)
    rough = np.random.default_rng(3).random(grid.points)
    with pytest.raises(ConvergenceError) as info:
        relax(0.0, grid, RelaxConfig(scheme="explicit", max_iters=1), initial=rough)
    state = info.value.state
    assert state is not None and not state.converged
    assert virial_residual(state) > 0.1


def test_variational_seed_width() -> None:
    assert variational_sigma(0.0) == 1.0
    assert variational_sigma(20.0) > 1.0
    wide = variational_sigma(-0.5 * N_MAX)
    narrow = variational_sigma(-0.5 * N_MAX, "unstable")
    assert narrow < SIGMA_MIN < wide
    with pytest.raises(DomainError):
        variational_sigma(5.0, "unstable")
    with pytest.raises(DomainError):
        variational_sigma(5.0, "sideways")


def test_variational_seed_without_minimum_warns(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING, logger="bec_stability.gpe_radial"):
        assert variational_sigma(-2.0 * N_MAX) == SIGMA_MIN
    assert "no_variational_minimum" in caplog.text


def test_gaussian_state_energy_matches_closed_form() -> None:
    grid = RadialGrid(points=8000)
    e = radial_energy(gaussian_state(grid, 0.8), grid, 3.0)
    closed = LocalModel(b=3.0, n=1.0).energy(0.8)
    assert math.isclose(e.total, closed.total, rel_tol=1e-5)


def test_profile_frame() -> None:
    state = relax(1.0, RadialGrid(points=500))
    frame = state.profile_frame()
    assert list(frame.columns) == ["r", "psi", "u"]
    assert len(frame) == 500
    assert (frame["u"] > 0.0).all()


def test_grid_and_config_validation(caplog: pytest.LogCaptureFixture) -> None:
    with pytest.raises(DomainError):
        RadialGrid(points=10)
    with pytest.raises(DomainError):
        RadialGrid(r_max=-1.0)
    with caplog.at_level(logging.WARNING, logger="bec_stability.gpe_radial"):
        RadialGrid(r_max=4.0)
    assert "grid_short" in caplog.text
    for kwargs in ({"scheme": "leapfrog"}, {"dtau": 0.0}, {"max_iters": 0}, {"residual_tol": 0.0}):
        with pytest.raises(DomainError):
            RelaxConfig(**kwargs)
    with pytest.raises(DomainError):
        relax(1.0, RadialGrid(points=100), initial=np.ones(50))
    with pytest.raises(DomainError):
        relax(math.nan)
