"""Acceptance criteria, one test each; every test prints a single pass/fail line.

Run with ``pytest tests/test_acceptance.py -v`` to see the summary lines.
"""
import pytest
from conftest import suite


def select(result, *keys):
    checks = [c for c in result.checks if c.comparison != "info"]
    if keys:
        checks = [c for c in checks if any(k in c.name for k in keys)]
    return checks


def report(number, title, checks, seconds, budget):
    ok = bool(checks) and all(c.passed for c in checks) and seconds < budget
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] criterion {number}: {title} ({len(checks)} checks, {seconds:.1f} s of {budget:.0f} s)"
    bad = [c.summary() for c in checks if not c.passed]
    if seconds >= budget:
        bad.append(f"runtime {seconds:.1f} s exceeds {budget:.0f} s")
    return ok, "\n".join([line] + ["    " + b for b in bad])


def check_criterion(capsys, number, title, checks, seconds, budget):
    ok, text = report(number, title, checks, seconds, budget)
    with capsys.disabled():
        print("\n" + text)
    assert ok, text


def test_criterion_1_moment_identities(capsys):
    res, sec = suite("verify-moments")
    check_criterion(capsys, 1, "Maxwellian moments match closed forms on flat, sphere band and torus",
                    select(res), sec, 10)


def test_criterion_2_geometry_identities(capsys):
    res, sec = suite("verify-geometry")
    check_criterion(capsys, 2, "contraction identity and metric compatibility converge at order >= 1.9",
                    select(res, "contraction identity", "metric compatibility"), sec, 30)


def test_criterion_3_geodesic_conservation(capsys):
    res, sec = suite("verify-geometry")
    check_criterion(capsys, 3, "great-circle speed invariant and period",
                    select(res, "great circle"), sec, 5)


def test_criterion_4_ce_solvability(capsys):
    res, sec = suite("verify-ce")
    check_criterion(capsys, 4, "conserved moments of the first-order correction vanish",
                    select(res, "moment of f1"), sec, 30)


def test_criterion_5_ce_closure(capsys):
    res, sec = suite("verify-ce")
    check_criterion(capsys, 5, "kinetic second moment converges to the covariant viscous stress",
                    select(res, "P1"), sec, 60)


@pytest.mark.slow
def test_criterion_6_viscosity(capsys):
    kin, t1 = suite("shear-kinetic")
    tg, t2 = suite("taylor-green")
    check_criterion(capsys, 6, "kinetic shear-layer viscosity and macro Taylor-Green decay within 2%",
                    select(kin, "fitted viscosity") + select(tg, "decay rate"), t1 + t2, 300)


@pytest.mark.slow
def test_criterion_7_conservation(capsys):
    res, sec = suite("conservation")
    check_criterion(capsys, 7, "mass drift of macro (1000 steps) and kinetic (500 steps) torus runs",
                    select(res), sec, 300)


def test_criterion_8_temperature_transport(capsys):
    res, sec = suite("euler-sphere-band")
    check_criterion(capsys, 8, "solid-rotation temperature transport error quarters under refinement",
                    select(res), sec, 120)
