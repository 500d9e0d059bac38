"""Solver invariants measured by the simulation suites (results shared with the acceptance run)."""
import pytest
from conftest import suite


def named(result, key):
    matches = [c for c in result.checks if key in c.name]
    assert len(matches) == 1, [c.name for c in result.checks]
    return matches[0]


@pytest.mark.slow
def test_heun_second_order_in_time():
    check = named(suite("taylor-green")[0], "halving dt")
    assert check.passed and check.value >= 3.5, check.summary()


@pytest.mark.slow
def test_euler_taylor_green_mode_constant():
    check = named(suite("taylor-green")[0], "euler")
    assert check.passed, check.summary()


@pytest.mark.slow
def test_kinetic_and_macro_agree_on_shear_layer():
    check = named(suite("shear-kinetic")[0], "kinetic vs macro")
    assert check.passed and check.value <= 0.03, check.summary()


@pytest.mark.slow
def test_non_uniform_kinetic_mass_drift_is_reported():
    check = named(suite("conservation")[0], "temperature-bump")
    assert check.comparison == "info" and check.value < 1e-4


def test_sphere_band_transport_ratios():
    checks = suite("euler-sphere-band")[0].checks
    assert len(checks) == 2 and all(c.passed for c in checks)
