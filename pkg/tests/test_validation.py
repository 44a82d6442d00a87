from __future__ import annotations

import numpy as np

from bec_stability.validation import NONLOCAL_ENERGY_PARAMS, REPORT_COLUMNS, ValidationConfig, run_validation

QUICK = ValidationConfig(
    local_sigmas=(0.5, 1.0, 2.0),
    local_couplings=(-5.0, 0.0, 20.0),
    nonlocal_sigmas=(0.5, 2.0),
    nonlocal_gammas=(0.5, 3.0),
    curve_sigmas=tuple(np.linspace(0.3, 0.95, 6)),
    mc_samples=200_000,
)


def test_quick_validation_passes() -> None:
    report = run_validation(QUICK)
    assert report.passed, report.failures
    assert report.resolved_variant == "over_sqrt2"

    checks = {r["check"] for r in report.rows}
    assert checks == {"local_energy", "nonlocal_energy", "n_of_sigma", "slope", "mc_pair"}
    assert len([r for r in report.rows if r["check"] == "local_energy"]) == 9
    composite = [r for r in report.rows if r["check"] == "nonlocal_energy"]
    assert len(composite) == (len(NONLOCAL_ENERGY_PARAMS) + 2) * 2
    assert {r["point"]["Gamma"] for r in composite} >= {0.5, 3.0}
    assert len([r for r in report.rows if r["check"] == "slope"]) == 2 * QUICK.slope_samples
    mc = next(r for r in report.rows if r["check"] == "mc_pair")
    assert mc["status"] == "pass"
    # tolerance column is the 3-standard-error band relative to the quadrature value
    assert QUICK.mc_sigmas == 3.0
    assert abs(mc["oracle"] - mc["closed_form"]) <= mc["tolerance"] * abs(mc["closed_form"])


def test_rejected_erfc_reading_is_reported_not_failed() -> None:
    report = run_validation(QUICK, include_mc=False)
    counts = report.summary()["counts"]
    assert counts["n_of_sigma[times_sqrt2]"]["fail"] > 0
    assert counts["n_of_sigma[over_sqrt2]"]["fail"] == 0
    assert all(r["variant"] != "times_sqrt2" for r in report.failures)


def test_tight_tolerance_fails() -> None:
    strict = ValidationConfig(
        tol=1e-15,
        local_sigmas=QUICK.local_sigmas,
        local_couplings=QUICK.local_couplings,
        nonlocal_sigmas=QUICK.nonlocal_sigmas,
        nonlocal_gammas=QUICK.nonlocal_gammas,
        curve_sigmas=QUICK.curve_sigmas,
    )
    report = run_validation(strict, include_mc=False)
    assert not report.passed
    assert report.summary()["failures"] == len(report.failures) > 0


def test_report_outputs() -> None:
    report = run_validation(QUICK, include_mc=False)
    frame = report.to_frame()
    assert list(frame.columns) == REPORT_COLUMNS
    assert frame["point"].str.contains("sigma=").all()
    payload = report.as_dict()
    assert set(payload) == {"summary", "config", "checks"}
    assert payload["summary"]["resolved_erfc_variant"] == "over_sqrt2"
    assert "mc_pair" not in {r["check"] for r in report.rows}
