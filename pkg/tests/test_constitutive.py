import numpy as np
import pytest

from manifold_kinetics.constitutive import (ENERGY_CLOSURES, closure_coefficient, euler_rates,
                                            euler_rhs, navier_stokes_rhs, tensors0,
                                            viscous_stress1, zeroth_order_tensors)
from manifold_kinetics.errors import ConfigError, InvalidState
from manifold_kinetics.experiments import random_point_states, random_smooth_state
from manifold_kinetics.geometry import (ChartGrid, chart_from_name, covariant_div_vector, flat,
                                        metric_at, metric_fields, sphere, torus)
from manifold_kinetics.kinetic import ce_first_order, maxwellian_values, nodal_moments
from manifold_kinetics.quadrature import VelocityQuadrature
from manifold_kinetics.state import FluidState


def fitted_order(ns, errs):
    return -np.polyfit(np.log(ns), np.log(errs), 1)[0]


# --- zeroth order -------------------------------------------------------------

def test_tensors0_flat_example():
    grid = ChartGrid(flat(), 3, 3)
    state = FluidState.uniform(grid.shape, rho=2.0, u=(0.3, -0.1), T=0.5)
    t = tensors0(state, grid)
    u = np.array([0.3, -0.1])
    np.testing.assert_allclose(t.p, 1.0)
    np.testing.assert_allclose(t.P0[0, 0], np.eye(2) + 2.0 * np.outer(u, u), rtol=1e-15)
    u2 = u @ u
    np.testing.assert_allclose(t.q0[0, 0], 2.0 * u * (2 * 0.5 + u2 / 2), rtol=1e-15)
    expected_Q = (np.einsum("i,jk->ijk", u, np.eye(2)) + np.einsum("j,ik->ijk", u, np.eye(2))
                  + np.einsum("k,ij->ijk", u, np.eye(2)) + 2.0 * np.einsum("i,j,k->ijk", u, u, u))
    np.testing.assert_allclose(t.Q0[1, 2], expected_Q, rtol=1e-15)


@pytest.mark.parametrize("name", ["sphere", "torus", "monge:saddle"])
def test_heat_flux_is_half_trace_of_Q0(name):
    """q0^i = g_jk Q0^ijk / 2 for the ideal-gas closures in two dimensions."""
    state, md = random_point_states(chart_from_name(name), np.random.default_rng(3), 50)
    P0, q0, Q0 = zeroth_order_tensors(state.rho, state.u, state.theta, md.g, md.g_inv)
    contracted = 0.5 * np.einsum("...jk,...ijk->...i", md.g, Q0)
    np.testing.assert_allclose(contracted, q0, rtol=1e-13, atol=1e-13)
    np.testing.assert_array_equal(P0, np.swapaxes(P0, -1, -2))
    for perm in [(0, 2, 1), (1, 0, 2), (2, 1, 0)]:
        np.testing.assert_allclose(Q0, np.transpose(Q0, (0,) + tuple(p + 1 for p in perm)),
                                   rtol=1e-15, atol=0)


def test_sphere_Q0_matches_quadrature():
    chart = sphere()
    rng = np.random.default_rng(11)
    md_points = (rng.uniform(0.9, 2.2, 20), rng.uniform(0, 2 * np.pi, 20))
    md = metric_fields(chart, *md_points)
    state = FluidState(rng.uniform(0.5, 2.0, 20),
                       np.einsum("...ia,...a->...i", md.frame, rng.uniform(-0.15, 0.15, (20, 2))),
                       rng.uniform(0.2, 2.0, 20))
    _, q0, Q0 = zeroth_order_tensors(state.rho, state.u, state.theta, md.g, md.g_inv)
    quad = VelocityQuadrature(8, 1.0)
    for i in range(20):
        mdi = metric_at(chart, (md_points[0][i], md_points[1][i]))
        s = FluidState(state.rho[i], state.u[i], state.T[i])
        mom = nodal_moments(maxwellian_values(s, mdi, quad, s.theta), quad, s.theta, mdi)
        scale = np.max(np.abs(Q0[i]))
        # theta-theta-phi component and the full tensor
        assert abs(mom.Q[0, 0, 1] - Q0[i, 0, 0, 1]) <= 1e-12 * scale
        np.testing.assert_allclose(mom.Q, Q0[i], atol=1e-12 * scale)
        np.testing.assert_allclose(mom.q, q0[i], atol=1e-12 * np.max(np.abs(q0[i])))


# --- viscous stress -----------------------------------------------------------

def test_viscous_stress_constant_velocity_flat_is_zero():
    grid = ChartGrid(flat(), 8, 8)
    state = FluidState.uniform(grid.shape, u=(0.1, 0.2), T=0.4)
    assert np.max(np.abs(viscous_stress1(state, grid, 0.05))) == 0.0


def test_viscous_stress_linear_shear_open_chart():
    """u = (0, gamma x1) on a non-periodic rectangle: P1^12 = -tau p gamma exactly."""
    grid = ChartGrid(flat(1.0, 1.0, periodic=(False, False)), 9, 7)
    gamma, tau, T = 0.3, 0.05, 0.8
    u = np.stack([np.zeros(grid.shape), gamma * grid.a1], axis=-1)
    state = FluidState(np.full(grid.shape, 1.5), u, np.full(grid.shape, T))
    P1 = viscous_stress1(state, grid, tau)
    eta = tau * 1.5 * T
    np.testing.assert_allclose(P1[..., 0, 1], -eta * gamma, rtol=1e-13)
    np.testing.assert_allclose(P1[..., 1, 0], -eta * gamma, rtol=1e-13)
    np.testing.assert_allclose(P1[..., 0, 0], 0.0, atol=1e-16)
    np.testing.assert_allclose(P1[..., 1, 1], 0.0, atol=1e-16)


def test_viscous_stress_linear_in_tau_symmetric_and_trace():
    grid = ChartGrid(torus(), 24, 24)
    state, _ = random_smooth_state(grid, np.random.default_rng(1))
    a = viscous_stress1(state, grid, 0.01)
    b = viscous_stress1(state, grid, 0.03)
    np.testing.assert_allclose(b, 3 * a, rtol=1e-13, atol=1e-18)
    np.testing.assert_array_equal(a, np.swapaxes(a, -1, -2))
    # g_ij P1^ij = -2 tau p div u
    trace = np.einsum("...ij,...ij->...", grid.metric.g, a)
    div = covariant_div_vector(grid, state.u, form="christoffel")
    np.testing.assert_allclose(trace, -2 * 0.01 * state.pressure * div, atol=1e-14)


def test_viscous_stress_solid_rotation_on_sphere_matches_ce_quadrature():
    """Rigid rotation is a Killing field: both the closure and the kinetic stress vanish to truncation."""
    errs = []
    for n in (32, 64):
        grid = ChartGrid(sphere(), n, 2 * n)
        u = np.stack([np.zeros(grid.shape), np.full(grid.shape, 0.1)], axis=-1)
        state = FluidState(np.ones(grid.shape), u, np.full(grid.shape, 1 / 3))
        P1 = viscous_stress1(state, grid, 0.02)
        Pq = ce_first_order(state, grid, VelocityQuadrature(8, 1 / 3), 0.02).moments().P
        np.testing.assert_allclose(P1, Pq, atol=1e-12)
        errs.append(np.max(np.abs(P1)))
    assert errs[1] < 1e-15 or errs[1] < 0.3 * errs[0]


# --- right-hand sides ---------------------------------------------------------

def test_euler_rhs_uniform_flat_is_exactly_zero():
    grid = ChartGrid(flat(), 8, 8)
    state = FluidState.uniform(grid.shape, rho=1.2, u=(0.1, -0.3), T=0.6)
    r = euler_rhs(state, grid)
    for a in (r.rho, r.u, r.T):
        assert np.max(np.abs(a)) == 0.0


def test_euler_rhs_temperature_gradient_drives_flow():
    """Linear T on an open rectangle at rest: u_t = -(k/m) dT/dx1, rho_t = 0, T_t = 0."""
    grid = ChartGrid(flat(1.0, 1.0, periodic=(False, False)), 7, 7)
    T = 0.5 + 0.2 * grid.a1
    state = FluidState(np.ones(grid.shape), np.zeros(grid.shape + (2,)), T, m=2.0, k=1.0)
    r = euler_rhs(state, grid)
    np.testing.assert_allclose(r.u[..., 0], -0.1, rtol=1e-13)
    np.testing.assert_allclose(r.u[..., 1], 0.0, atol=1e-15)
    np.testing.assert_allclose(r.rho, 0.0, atol=1e-15)
    np.testing.assert_allclose(r.T, 0.0, atol=1e-15)


def test_euler_rhs_sphere_centrifugal_term():
    """Uniform rotation u = (0, Omega): u^theta_t = sin cos Omega^2 to truncation order."""
    omega = 0.2
    errs = []
    for n in (32, 64, 128):
        grid = ChartGrid(sphere(), n, 2 * n)
        u = np.stack([np.zeros(grid.shape), np.full(grid.shape, omega)], axis=-1)
        state = FluidState(np.ones(grid.shape), u, np.full(grid.shape, 1 / 3))
        r = euler_rhs(state, grid)
        exact = np.sin(grid.a1) * np.cos(grid.a1) * omega ** 2
        errs.append(max(np.max(np.abs(r.u[..., 0] - exact)), np.max(np.abs(r.u[..., 1])),
                        np.max(np.abs(r.rho)), np.max(np.abs(r.T))))
    assert errs[-1] < 1e-3 * omega ** 2
    assert fitted_order([32, 64, 128], errs) > 1.9


def test_euler_rates_pointwise_centrifugal_exact():
    chart = sphere()
    md = metric_at(chart, (1.0, 0.3))
    u = np.array([0.0, 0.2])
    z2, z22 = np.zeros(2), np.zeros((2, 2))
    rho_t, u_t, th_t = euler_rates(np.array(1.0), u, np.array(0.3), md, z2, z22, z2)
    np.testing.assert_allclose(u_t, [np.sin(1.0) * np.cos(1.0) * 0.04, 0.0], atol=1e-16)
    assert rho_t == 0.0 and th_t == 0.0


def test_navier_stokes_with_zero_tau_is_euler():
    grid = ChartGrid(torus(), 16, 16)
    state, _ = random_smooth_state(grid, np.random.default_rng(2))
    a, b = euler_rhs(state, grid), navier_stokes_rhs(state, grid, 0.0)
    for x, y in [(a.rho, b.rho), (a.u, b.u), (a.T, b.T)]:
        np.testing.assert_array_equal(x, y)


def test_uniform_rest_on_torus_is_steady_to_truncation():
    errs = []
    for n in (32, 64, 128):
        grid = ChartGrid(torus(), n, n)
        state = FluidState.uniform(grid.shape, rho=1.0, T=0.5)
        r = navier_stokes_rhs(state, grid, 0.05)
        errs.append(max(np.max(np.abs(r.u)), np.max(np.abs(r.rho)), np.max(np.abs(r.T))))
    assert errs[-1] < 1e-3
    assert errs[-1] < 1e-13 or fitted_order([32, 64, 128], errs) > 1.9


def test_shear_layer_viscous_damping_rate():
    """u = (0, A sin x1) on the flat torus: du^2/dt = -nu A sin x1 with nu = tau kT/m."""
    n, A, tau, theta = 64, 0.05, 0.02, 1 / 3
    grid = ChartGrid(flat(), n, n)
    u = np.stack([np.zeros(grid.shape), A * np.sin(grid.a1)], axis=-1)
    state = FluidState(np.ones(grid.shape), u, np.full(grid.shape, theta))
    r = navier_stokes_rhs(state, grid, tau)
    exact = -tau * theta * A * np.sin(grid.a1)
    h = grid.spacing[0]
    # central differences of a sine pick up (sin h / h)^2 - like factors; second-order close
    assert np.max(np.abs(r.u[..., 1] - exact)) < 2 * h ** 2 * tau * theta * A
    np.testing.assert_allclose(r.u[..., 0], 0.0, atol=1e-18)


# --- energy closures ----------------------------------------------------------

def test_energy_closure_coefficients():
    assert closure_coefficient("kinetic") == -1.0
    assert closure_coefficient("printed") == 1.0
    assert set(ENERGY_CLOSURES) == {"kinetic", "printed"}
    with pytest.raises(ConfigError):
        closure_coefficient("adiabatic")


def test_energy_closures_differ_only_in_compression_term():
    grid = ChartGrid(flat(), 32, 32)
    x1 = grid.a1
    u = np.stack([0.05 * np.sin(x1), np.zeros(grid.shape)], axis=-1)
    state = FluidState(np.ones(grid.shape), u, np.full(grid.shape, 0.4))
    kin, printed = euler_rhs(state, grid, "kinetic"), euler_rhs(state, grid, "printed")
    div = grid.partial(u[..., 0], 0)
    np.testing.assert_allclose(kin.T, -0.4 * div, atol=1e-16)
    np.testing.assert_allclose(printed.T, 0.4 * div, atol=1e-16)
    np.testing.assert_array_equal(kin.u, printed.u)
    with pytest.raises(ConfigError):
        euler_rhs(state, grid, "other")


def test_rhs_validates_state():
    grid = ChartGrid(flat(), 4, 4)
    bad = FluidState.uniform(grid.shape, rho=-1.0, T=1.0)
    with pytest.raises(InvalidState):
        euler_rhs(bad, grid)
