import json

import numpy as np
import pytest

from manifold_kinetics.errors import (CflViolation, ConfigError, InterpolationOutOfDomain,
                                      NanDetected)
from manifold_kinetics.geometry import ChartGrid, flat, sphere, torus
from manifold_kinetics.kinetic import equilibrium
from manifold_kinetics.quadrature import VelocityQuadrature
from manifold_kinetics.solver import (DIAGNOSTIC_COLUMNS, DepartureInterpolator,
                                      SimulationConfig, Streamer, UniformShiftInterpolator,
                                      advect_temperature, angular_derivative, cfl_limit,
                                      check_cfl, diagnostics, fit_decay_rate, initial_state,
                                      interpolate, kinetic_step, macro_step, read_snapshot,
                                      relaxation_interval, resolve_dt, run, write_snapshot)
from manifold_kinetics.state import FluidState


# --- interpolation --------------------------------------------------------------

def test_spline_preserves_constants():
    vals = np.full((12, 10), 2.5)
    rng = np.random.default_rng(0)
    s1, s2 = rng.uniform(-20, 20, 50), rng.uniform(-20, 20, 50)
    np.testing.assert_allclose(interpolate(vals, s1, s2), 2.5, rtol=1e-14)


def test_spline_interpolates_nodes_and_converges_fourth_order():
    rng = np.random.default_rng(1)
    vals = rng.normal(size=(9, 7))
    i1, i2 = np.meshgrid(np.arange(9), np.arange(7), indexing="ij")
    np.testing.assert_allclose(interpolate(vals, i1, i2), vals, atol=1e-13)
    errs = []
    for n in (16, 32, 64):
        x = 2 * np.pi * np.arange(n) / n
        f = np.sin(x)[:, None] * np.cos(2 * x)[None, :]
        j1, j2 = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        xh = x + np.pi / n  # half a node
        exact = np.sin(xh)[:, None] * np.cos(2 * xh)[None, :]
        errs.append(np.max(np.abs(interpolate(f, j1 + 0.5, j2 + 0.5) - exact)))
    order = -np.polyfit(np.log([16, 32, 64]), np.log(errs), 1)[0]
    assert order > 3.8


def test_uniform_shift_matches_sparse_departure():
    rng = np.random.default_rng(2)
    n1, n2, nv = 10, 12, 5
    vals = rng.normal(size=(n1, n2, nv))
    sh1, sh2 = rng.uniform(-3, 3, nv), rng.uniform(-3, 3, nv)
    fast = UniformShiftInterpolator((n1, n2), sh1, sh2)(vals)
    i1, i2 = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    s1 = i1[..., None] + sh1
    s2 = i2[..., None] + sh2
    slow = DepartureInterpolator(s1, s2)(vals)
    np.testing.assert_allclose(fast, slow, atol=1e-13)


def test_integer_shift_is_a_roll():
    rng = np.random.default_rng(3)
    vals = rng.normal(size=(8, 6, 2))
    out = UniformShiftInterpolator((8, 6), np.array([2.0, -1.0]), np.array([0.0, 3.0]))(vals)
    np.testing.assert_allclose(out[..., 0], np.roll(vals[..., 0], -2, axis=0), atol=1e-13)
    np.testing.assert_allclose(out[..., 1], np.roll(np.roll(vals[..., 1], 1, 0), -3, 1), atol=1e-13)


# --- velocity rotation ----------------------------------------------------------

def test_angular_derivative_on_hermite_modes():
    quad = VelocityQuadrature(8, 0.7)
    xi = quad.standard_nodes
    gauss = np.exp(-np.sum(xi ** 2, -1))
    np.testing.assert_allclose(angular_derivative(quad, gauss), 0.0, atol=1e-14)
    np.testing.assert_allclose(angular_derivative(quad, xi[:, 0] * gauss), -xi[:, 1] * gauss,
                               atol=1e-13)
    np.testing.assert_allclose(angular_derivative(quad, xi[:, 1] * gauss), xi[:, 0] * gauss,
                               atol=1e-13)
    # L (x^2 - y^2) = -4 x y
    np.testing.assert_allclose(angular_derivative(quad, (xi[:, 0] ** 2 - xi[:, 1] ** 2) * gauss),
                               -4 * xi[:, 0] * xi[:, 1] * gauss, atol=1e-12)


# --- streaming ------------------------------------------------------------------

@pytest.mark.parametrize("chart", [flat(), torus()])
def test_streaming_leaves_uniform_rest_equilibrium_unchanged(chart):
    grid = ChartGrid(chart, 12, 12)
    quad = VelocityQuadrature(6, 1 / 3)
    f = equilibrium(FluidState.uniform(grid.shape, T=1 / 3), grid, quad, 0.1, 1 / 3)
    out = Streamer(grid, quad, 1 / 3, 0.02)(f.values)
    np.testing.assert_allclose(out, f.values, rtol=1e-12, atol=1e-15)


def test_streaming_requires_periodic_chart():
    grid = ChartGrid(sphere(), 8, 8)
    with pytest.raises(InterpolationOutOfDomain):
        Streamer(grid, VelocityQuadrature(4, 1 / 3), 1 / 3, 0.01)


def test_relaxation_interval():
    assert relaxation_interval(0.1, 0.1) == pytest.approx(0.1 * (1 - np.exp(-1)), rel=1e-15)
    assert relaxation_interval(1e-8, 1.0) == pytest.approx(1e-8, rel=1e-7)


def _kinetic_setup(n=12, Q=6, tau=0.1, dt=0.01):
    grid = ChartGrid(flat(), n, n)
    quad = VelocityQuadrature(Q, 1 / 3)
    f = equilibrium(FluidState.uniform(grid.shape, T=1 / 3), grid, quad, tau, 1 / 3)
    cfg = SimulationConfig(solver="kinetic-bgk", grid=(n, n), quad_order=Q, tau=tau, dt=dt)
    return grid, f, cfg


def test_kinetic_step_rejects_dt_above_tau():
    grid, f, cfg = _kinetic_setup(tau=0.01, dt=0.02)
    with pytest.raises(ValueError):
        kinetic_step(f, grid, cfg)


def test_kinetic_step_detects_non_finite():
    grid, f, cfg = _kinetic_setup()
    v = f.values.copy()
    v[2, 3, 4] = np.nan
    with pytest.raises(NanDetected) as info:
        kinetic_step(f.with_values(v), grid, cfg, step_index=7)
    assert info.value.step == 7


def test_kinetic_step_uniform_fixed_point():
    grid, f, cfg = _kinetic_setup()
    out = kinetic_step(f, grid, cfg)
    np.testing.assert_allclose(out.values, f.values, rtol=1e-12, atol=1e-16)


# --- macro solver ---------------------------------------------------------------

def test_macro_step_uniform_fixed_point():
    grid = ChartGrid(flat(), 16, 16)
    state = FluidState.uniform(grid.shape, rho=1.0, u=(0.1, 0.05), T=1 / 3)
    cfg = SimulationConfig(solver="navier-stokes", dt=0.01)
    new = macro_step(state, grid, cfg)
    np.testing.assert_array_equal(new.rho, state.rho)
    np.testing.assert_array_equal(new.u, state.u)
    np.testing.assert_array_equal(new.T, state.T)


def test_macro_step_cfl_violation():
    grid = ChartGrid(flat(), 16, 16)
    state = FluidState.uniform(grid.shape, T=1 / 3)
    limit = cfl_limit(state, grid)
    check_cfl(limit, state, grid)
    with pytest.raises(CflViolation):
        macro_step(state, grid, SimulationConfig(dt=1.01 * limit))
    with pytest.raises(CflViolation):
        check_cfl(0.0, state, grid)


def test_macro_step_rejects_open_chart():
    grid = ChartGrid(sphere(), 8, 8)
    state = FluidState.uniform(grid.shape, T=1 / 3)
    with pytest.raises(ConfigError):
        macro_step(state, grid, SimulationConfig(dt=1e-3))


def test_macro_step_detects_negative_density():
    grid = ChartGrid(flat(), 16, 16)
    rho = np.where(grid.a1 < np.pi, 1.0, 1e-8)
    u = np.zeros(grid.shape + (2,))
    u[..., 0] = 0.5
    state = FluidState(rho, u, np.full(grid.shape, 1 / 3))
    cfg = SimulationConfig(solver="euler", dt=cfl_limit(state, grid))
    with pytest.raises(NanDetected):
        macro_step(state, grid, cfg, step_index=5)


def test_advect_temperature_constant_shift_second_order():
    errs = []
    for n in (32, 64, 128):
        grid = ChartGrid(flat(), n, n)
        u = np.zeros(grid.shape + (2,))
        u[..., 0] = 0.5
        T0 = 1.0 + 0.1 * np.sin(grid.a1)
        t_end, steps = 1.0, 2 * n
        T = advect_temperature(T0, u, grid, t_end / steps, steps)
        errs.append(np.max(np.abs(T - (1.0 + 0.1 * np.sin(grid.a1 - 0.5 * t_end)))))
    order = -np.polyfit(np.log([32, 64, 128]), np.log(errs), 1)[0]
    assert order > 1.9


def test_advect_temperature_uniform_is_steady_under_rotation():
    grid = ChartGrid(sphere(), 16, 32)
    u = np.stack([np.zeros(grid.shape), np.ones(grid.shape)], axis=-1)
    T = np.full(grid.shape, 0.7)
    np.testing.assert_array_equal(advect_temperature(T, u, grid, 0.01, 10), T)


# --- configuration --------------------------------------------------------------

@pytest.mark.parametrize("bad", [
    {"solver": "lbm"}, {"initial": "vortex"}, {"steps": -1}, {"output_every": 0},
    {"solver": "kinetic-bgk", "tau": 0.0}, {"tau": -1.0}, {"theta0": 0.0}, {"grid": [4]},
    {"energy": "adiabatic"},
])
def test_config_rejects_bad_values(bad):
    with pytest.raises(ConfigError):
        SimulationConfig.from_dict(bad)


def test_config_rejects_unknown_keys_and_round_trips():
    with pytest.raises(ConfigError):
        SimulationConfig.from_dict({"viscosity": 1.0})
    cfg = SimulationConfig(grid=(8, 16), tau=0.05)
    assert SimulationConfig.from_dict(cfg.to_dict()) == cfg


def test_resolve_dt():
    cfg = SimulationConfig(grid=(16, 16), solver="navier-stokes")
    grid = cfg.build_grid()
    state = initial_state(cfg, grid)
    assert resolve_dt(cfg, state, grid) == pytest.approx(0.8 * cfl_limit(state, grid))
    kin = SimulationConfig(grid=(16, 16), solver="kinetic-bgk", tau=0.01)
    assert resolve_dt(kin, state, grid) == pytest.approx(0.0025)
    assert resolve_dt(SimulationConfig(dt=0.003), state, grid) == 0.003


# --- diagnostics and runs -------------------------------------------------------

def test_diagnostics_torus_mass_and_rest_momentum():
    grid = ChartGrid(torus(R=2.0, r=1.0), 16, 24)
    state = FluidState.uniform(grid.shape, rho=1.5, T=0.5)
    d = diagnostics(state, grid, 3, 0.1)
    assert d["M"] == pytest.approx(1.5 * 8 * np.pi ** 2, rel=1e-13)
    assert d["E"] == pytest.approx(1.5 * 0.5 * 8 * np.pi ** 2, rel=1e-13)
    assert d["P1"] == 0.0 and d["P2"] == 0.0
    assert np.isnan(d["mode_amp"])
    assert tuple(d) == DIAGNOSTIC_COLUMNS


def test_fit_decay_rate_exact_exponential():
    t = np.linspace(0, 5, 21)
    assert fit_decay_rate(t, 0.3 * np.exp(-0.17 * t)) == pytest.approx(0.17, rel=1e-12)
    assert fit_decay_rate(t, -0.3 * np.exp(-0.17 * t), t_min=1.0) == pytest.approx(0.17, rel=1e-12)


def test_run_zero_steps_gives_single_row():
    res = run(SimulationConfig(grid=(8, 8), steps=0))
    assert len(res.diagnostics) == 1
    assert res.diagnostics[0]["step"] == 0
    assert res.diagnostics[0]["mode_amp"] == pytest.approx(0.05, rel=1e-12)


def test_run_outputs(tmp_path):
    cfg = SimulationConfig(grid=(16, 16), steps=6, snapshot_every=3, output_every=2)
    res = run(cfg, tmp_path / "a")
    lines = (tmp_path / "a" / "diagnostics.csv").read_text().splitlines()
    assert lines[0].split(",") == list(DIAGNOSTIC_COLUMNS)
    assert [int(x.split(",")[0]) for x in lines[1:]] == [0, 2, 4, 6]
    t = res.series("time")
    assert np.all(np.diff(t) > 0)
    cfg_out = json.loads((tmp_path / "a" / "config.json").read_text())
    assert cfg_out["dt"] == res.config.dt and cfg_out["steps"] == 6
    snaps = sorted(p.name for p in (tmp_path / "a").glob("snapshot_*.json"))
    assert snaps == ["snapshot_000003.json", "snapshot_000006.json"]
    fields = read_snapshot(tmp_path / "a" / "snapshot_000006.json")
    np.testing.assert_array_equal(fields["u"], res.state.u)
    np.testing.assert_array_equal(fields["rho"], res.state.rho)
    # repeat into a second directory: byte-identical outputs
    run(cfg, tmp_path / "b")
    for name in ("diagnostics.csv", "snapshot_000006.bin", "snapshot_000006.json", "config.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_kinetic_run_conserves_mass_on_flat_chart(tmp_path):
    cfg = SimulationConfig(grid=(16, 16), steps=5, solver="kinetic-bgk", quad_order=6, tau=0.05)
    res = run(cfg, tmp_path)
    M = res.series("M")
    assert np.max(np.abs(M - M[0])) < 1e-12 * M[0]
    assert (tmp_path / "distribution_000005.json").exists()
    dist = read_snapshot(tmp_path / "distribution_000005.json")
    np.testing.assert_array_equal(dist["f"], res.distribution.values)


def test_snapshot_round_trip(tmp_path):
    grid = ChartGrid(torus(), 4, 6)
    rng = np.random.default_rng(0)
    fields = {"a": rng.normal(size=(4, 6)), "b": rng.normal(size=(4, 6, 2, 2))}
    header = write_snapshot(tmp_path / "snap", fields, grid, {"step": 9})
    meta = json.loads(header.read_text())
    assert meta["grid"] == [4, 6] and meta["chart"] == "torus" and meta["step"] == 9
    assert meta["byte_order"] == "little" and meta["dtype"] == "float64"
    assert (tmp_path / "snap.bin").stat().st_size == 8 * (24 + 96)
    back = read_snapshot(header)
    for k in fields:
        np.testing.assert_array_equal(back[k], fields[k])
