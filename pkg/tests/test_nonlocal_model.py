from __future__ import annotations

import math

import numpy as np
import pytest

from bec_stability.errors import DomainError, PoleError
from bec_stability.local_model import LocalModel, n_of_sigma
from bec_stability.nonlocal_model import NonlocalModel, screening_factors
from bec_stability.oracle import fd_derivative
from bec_stability.params import CompositeKernel, ContactKernel, ScreenedKernel
from bec_stability.validation import slope_scale

SIGMAS = (0.3, 0.5, 0.8, 1.0, 1.3, 2.0, 3.0)


def test_reduces_to_local_model_without_screened_part() -> None:
    for b in (-1.0, 0.0, 2.5):
        local = LocalModel(b=b, n=7.0)
        nonlocal_ = NonlocalModel(b=b, a=0.0, gamma=3.0, n=7.0)
        for s in SIGMAS:
            for got, want in zip(nonlocal_.energy(s).as_dict().values(), local.energy(s).as_dict().values()):
                assert math.isclose(got, want, rel_tol=1e-14, abs_tol=1e-15)
            assert math.isclose(nonlocal_.denergy_dsigma(s), local.denergy_dsigma(s), rel_tol=1e-14, abs_tol=1e-12)


def test_closed_form_n_reduces_to_local_n() -> None:
    for b in (-1.0, 1.0):
        model = NonlocalModel(b=b, a=0.0, gamma=0.0)
        for s in (0.5, 0.8, 1.2, 2.0):
            assert math.isclose(model.n_of_sigma(s), n_of_sigma(b, s), rel_tol=1e-12)
            assert math.isclose(model.n_of_sigma_oracle(s), n_of_sigma(b, s), rel_tol=1e-9)


def test_unscreened_coulomb_limit() -> None:
    model = NonlocalModel(b=0.0, a=1.0, gamma=0.0, n=2.0)
    for s in SIGMAS:
        assert math.isclose(model.energy(s).interaction, -math.sqrt(2.0 / math.pi) / s, rel_tol=1e-14)
    nearly = NonlocalModel(b=0.0, a=1.0, gamma=1e-9, n=2.0)
    assert math.isclose(nearly.energy(1.0).interaction, model.energy(1.0).interaction, rel_tol=1e-8)


def test_screened_interaction_regression_value() -> None:
    e = NonlocalModel(b=0.0, a=1.0, gamma=1.0, n=2.0).energy(1.0)
    assert math.isclose(e.interaction, -0.27472797707261865, rel_tol=1e-12)
    g, _ = screening_factors(1.0 / math.sqrt(2.0))
    assert math.isclose(g, 0.34432045758120156, rel_tol=1e-12)


def test_screening_factor_limits() -> None:
    assert screening_factors(0.0) == (1.0, -1.0)
    for x in (50.0, 1e3, 1e6):
        g, h = screening_factors(x)
        assert math.isclose(g, 1.0 / (2.0 * x * x), rel_tol=2.0 / x**2)
        assert math.isclose(h, -1.5 / (x * x), rel_tol=5.0 / x**2)
    # the two evaluation paths meet at x = 2
    below = screening_factors(math.nextafter(2.0, 0.0))
    above = screening_factors(2.0)
    assert math.isclose(below[0], above[0], rel_tol=1e-10)
    assert math.isclose(below[1], above[1], rel_tol=1e-10)


def test_screening_weakens_attraction_monotonically() -> None:
    magnitudes = [
        abs(NonlocalModel(b=0.0, a=1.0, gamma=float(g), n=2.0).energy(1.0).interaction)
        for g in np.linspace(0.0, 50.0, 101)
    ]
    assert all(b <= a * (1.0 + 1e-15) for a, b in zip(magnitudes, magnitudes[1:]))


def test_large_gamma_sigma_stays_finite() -> None:
    model = NonlocalModel(b=0.0, a=1.0, gamma=100.0, n=5.0)
    e = model.energy(10.0)
    assert all(math.isfinite(v) for v in (e.kinetic, e.trap, e.interaction))
    assert math.isfinite(model.denergy_dsigma(10.0))
    for variant in ("over_sqrt2", "times_sqrt2"):
        assert math.isfinite(model.n_of_sigma_closed_form(10.0, variant))


def test_effective_contact_limit() -> None:
    model = NonlocalModel(b=0.0, a=1.0, gamma=200.0, n=10.0)
    assert math.isclose(model.effective_contact(), -4.0 * math.pi / 200.0**2, rel_tol=1e-15)
    contact = LocalModel(b=model.effective_contact(), n=10.0)
    assert math.isclose(model.energy(1.0).interaction, contact.energy(1.0).interaction, rel_tol=1e-3)
    with pytest.raises(DomainError):
        NonlocalModel(b=0.0, a=1.0, gamma=0.0).effective_contact()


def test_closed_form_n_matches_stationarity_oracle() -> None:
    for b, a, gamma in ((-0.5, 1.0, 2.0), (0.0, 1.0, 1.0), (-1e-4, 3.0, 40.0)):
        model = NonlocalModel(b=b, a=a, gamma=gamma)
        for s in np.linspace(0.3, 0.95, 14):
            s = float(s)
            closed = model.n_of_sigma_closed_form(s, "over_sqrt2")
            oracle = model.n_of_sigma_oracle(s)
            assert oracle > 0.0
            assert math.isclose(closed, oracle, rel_tol=1e-6), (b, a, gamma, s)


def test_times_sqrt2_reading_disagrees_with_oracle() -> None:
    model = NonlocalModel(b=-0.5, a=1.0, gamma=2.0)
    errors = [
        abs(model.n_of_sigma_closed_form(s, "times_sqrt2") / model.n_of_sigma_oracle(s) - 1.0)
        for s in (0.4, 0.5, 0.7)
    ]
    assert max(errors) > 1e-3


def test_oracle_n_makes_width_stationary() -> None:
    model = NonlocalModel(b=-0.5, a=1.0, gamma=2.0)
    n = model.n_of_sigma_oracle(0.7)
    assert math.isfinite(n) and n > 0.0
    assert abs(model.with_n(n).denergy_dsigma(0.7)) < 1e-9


def test_n_vanishes_at_oscillator_length() -> None:
    assert NonlocalModel(b=-0.5, a=1.0, gamma=2.0).n_of_sigma_closed_form(1.0) == 0.0
    assert NonlocalModel(b=-1.0, a=0.0, gamma=0.0).n_of_sigma(1.0) == 0.0


def test_pole_detection() -> None:
    with pytest.raises(PoleError):
        NonlocalModel(b=0.0, a=0.0, gamma=0.0).n_of_sigma_closed_form(0.7)
    try:
        NonlocalModel(b=0.0, a=0.0, gamma=0.0).n_of_sigma_oracle(0.7)
        assert False, "Expected PoleError without any interaction"
    except PoleError as e:
        assert e.sigma == 0.7


def test_analytic_slope_matches_differences() -> None:
    rng = np.random.default_rng(7)
    for _ in range(1000):
        s = float(rng.uniform(0.2, 3.0))
        b, a, gamma, n = (float(rng.uniform(-2.0, 2.0)), float(rng.uniform(0.0, 3.0)),
                          float(rng.uniform(0.0, 10.0)), float(rng.uniform(0.0, 50.0)))
        model = NonlocalModel(b=b, a=a, gamma=gamma, n=n)
        numeric = fd_derivative(lambda x: model.energy(x).total, s).value
        analytic = model.denergy_dsigma(s)
        assert abs(analytic - numeric) <= 1e-8 * max(abs(analytic), slope_scale(s, b, a, n))


def test_from_kernel_and_flags() -> None:
    model = NonlocalModel.from_kernel(CompositeKernel(ContactKernel(-1e-4), ScreenedKernel(3.0, 40.0)), n=100.0)
    assert (model.b, model.a, model.gamma, model.n) == (-1e-4, 3.0, 40.0, 100.0)
    assert model.collapses and model.attractive
    repulsive_screened = NonlocalModel.from_kernel(ScreenedKernel(1.0, 1.0), n=3.0)
    assert repulsive_screened.attractive and not repulsive_screened.collapses
    assert not NonlocalModel(b=1.0, a=0.0, gamma=0.0).attractive
    assert model.describe()["model"] == "nonlocal"


def test_parameter_validation() -> None:
    for kwargs in ({"a": -1.0}, {"gamma": -0.1}, {"n": -2.0}, {"b": math.inf}, {"erfc_variant": "other"}):
        params = {"b": 0.0, "a": 1.0, "gamma": 1.0, **kwargs}
        with pytest.raises(DomainError):
            NonlocalModel(**params)
    with pytest.raises(DomainError):
        NonlocalModel(b=0.0, a=1.0, gamma=1.0).energy(0.0)
