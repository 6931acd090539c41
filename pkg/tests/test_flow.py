import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypmass.errors import HypothesisError, InputError, StiffnessError, TailFitError
from hypmass.flow import (Barriers, FlowConfig, FlowState, boundary_data_from_curvature,
                          explicit_solution, ode_constant, record_radii, rhs, solution_from_table,
                          solve, step, v_infinity)
from hypmass.grid import PeriodicGridFunction, phi_grid, spectral_derivative


def reference_rhs(r, u):
    """Independent transcription of the flow equation, used by the oracles."""
    upp = np.real(np.fft.ifft(-np.fft.fftfreq(u.size, 1.0 / u.size) ** 2 * np.fft.fft(u)))
    return u * u * upp / (r * (1 + r * r)) - r * (u**3 - u) / (1 + r * r)


def test_ode_constant_and_explicit_solution_agree():
    for c in (0.5, 1.0, 2.0):
        for r0 in (0.5, 3.0):
            K = ode_constant(c, r0)
            assert K == pytest.approx((1 / c**2 - 1) * (1 + r0 * r0))
            assert explicit_solution(K, r0) == pytest.approx(c)


def test_explicit_solution_solves_the_ode():
    K, r, h = 0.8, 2.0, 1e-5
    du = (explicit_solution(K, r + h) - explicit_solution(K, r - h)) / (2 * h)
    u = explicit_solution(K, r)
    assert du == pytest.approx(-r * (u**3 - u) / (1 + r * r), rel=1e-8)


def test_barriers_pinch_initial_data():
    u0 = 1 + 0.3 * np.cos(phi_grid(32))
    b = Barriers.from_initial(u0, 1.5)
    assert b.K1 <= b.K2
    assert b.f1(1.5) == pytest.approx(u0.max())
    assert b.f2(1.5) == pytest.approx(u0.min())
    assert b.violation(1.5, u0) <= 1e-15
    assert b.violation(1.5, u0 + 1e-3) == pytest.approx(1e-3)


def test_boundary_data_examples():
    r0 = 2.0
    k1 = np.sqrt(1 + r0 * r0) / r0
    assert np.allclose(boundary_data_from_curvature(np.full(8, k1), r0).values, 1.0)
    assert np.allclose(boundary_data_from_curvature(np.full(8, 2.0), 1.0).values, np.sqrt(2) / 2)
    phi = phi_grid(16)
    u0 = boundary_data_from_curvature(k1 / (1 + 0.3 * np.cos(phi)), r0)
    assert np.allclose(u0.values, 1 + 0.3 * np.cos(phi))


@pytest.mark.parametrize("k", [np.zeros(8), np.r_[np.ones(7), -0.1]])
def test_boundary_data_rejects_nonpositive_curvature(k):
    with pytest.raises(HypothesisError):
        boundary_data_from_curvature(k, 1.0)


def test_rhs_examples():
    phi = phi_grid(32)
    assert np.allclose(rhs(2.0, np.ones(32)).values, 0.0)
    r, c = 1.7, 1.4
    assert np.allclose(rhs(r, np.full(32, c)).values, -r * (c**3 - c) / (1 + r * r))
    d = 1e-6
    lin = rhs(r, 1 + d * np.cos(phi)).values / d
    pred = -np.cos(phi) * (1 / (r * (1 + r * r)) + 2 * r / (1 + r * r))
    assert np.allclose(lin, pred, atol=1e-5)
    u = 1 + 0.2 * np.sin(2 * phi)
    assert np.allclose(rhs(r, u).values, reference_rhs(r, u), atol=1e-13)


def test_step_keeps_fixed_point():
    cfg = FlowConfig(r0=1.0, n_phi=16)
    state = FlowState(1.0, PeriodicGridFunction(np.ones(16)), 1e-3, Barriers(0.0, 0.0))
    for _ in range(20):
        state = step(state, cfg)
    assert state.r > 1.0
    assert np.array_equal(state.u.values, np.ones(16))


def test_step_tracks_explicit_solution():
    cfg = FlowConfig(r0=1.0, n_phi=16)
    c = 1.3
    K = ode_constant(c, 1.0)
    state = FlowState(1.0, PeriodicGridFunction(np.full(16, c)), 1e-3, Barriers(K, K))
    for _ in range(50):
        state = step(state, cfg)
    assert np.max(np.abs(state.u.values - explicit_solution(K, state.r))) <= 10 * cfg.tol


def test_record_radii():
    cfg = FlowConfig(r0=1.0, r_max=100.0)
    radii, mask = record_radii(cfg)
    assert radii[0] == 1.0 and radii[-1] == 100.0
    assert np.all(np.diff(radii) > 0)
    assert np.all(radii[1:-1] / radii[:-2] <= 1.2 ** (1 / cfg.records_per_checkpoint) + 1e-12)
    checkpoints = radii[mask][:-1]
    assert np.allclose(checkpoints[1:] / checkpoints[:-1], 1.2)


@pytest.mark.parametrize("kwargs", [dict(r0=0.0), dict(r0=2.0, r_max=1.0), dict(r0=1.0, n_phi=15),
                                    dict(r0=1.0, tol=0.0), dict(r0=1.0, tail_fit_window=1.0),
                                    dict(r0=1.0, records_per_checkpoint=0)])
def test_flow_config_validation(kwargs):
    with pytest.raises(InputError):
        FlowConfig(**kwargs)


def test_solve_rejects_nonpositive_data():
    with pytest.raises(InputError):
        solve(np.r_[np.ones(15), 0.0], FlowConfig(r0=1.0, n_phi=16))


@pytest.mark.parametrize("c,r0", [(0.5, 1.0), (2.0, 3.0)])
def test_constant_data_tail(c, r0):
    sol = solve(np.full(32, c), FlowConfig(r0=r0, n_phi=32))
    K = ode_constant(c, r0)
    assert np.max(np.abs(sol.u - explicit_solution(K, sol.radii)[:, None])) <= 1e-6
    tail = v_infinity(sol)
    assert np.allclose(tail.v_inf.values, -K / 2, atol=1e-5)
    assert sol.max_barrier_violation <= 10 * sol.config.tol


def test_unit_data_stays_unit():
    sol = solve(np.ones(16), FlowConfig(r0=0.7, n_phi=16))
    assert np.array_equal(sol.u, np.ones_like(sol.u))
    assert np.array_equal(v_infinity(sol).v_inf.values, np.zeros(16))


def test_solve_resamples_coarse_data():
    sol = solve(1 + 0.1 * np.cos(phi_grid(8)), FlowConfig(r0=1.0, r_max=5.0, n_phi=32))
    assert sol.u.shape[1] == 32
    assert sol.u[0] == pytest.approx(1 + 0.1 * np.cos(phi_grid(32)))


def test_max_steps_guard():
    with pytest.raises(StiffnessError):
        solve(1 + 0.1 * np.cos(phi_grid(16)), FlowConfig(r0=1.0, n_phi=16, max_steps=3))


def test_tail_fit_needs_records():
    sol = solve(np.full(16, 1.2), FlowConfig(r0=1.0, r_max=50.0, n_phi=16, tail_fit_window=1.01))
    with pytest.raises(TailFitError):
        v_infinity(sol)


def test_solution_from_table_round_trip():
    sol = solve(1 + 0.2 * np.cos(phi_grid(16)), FlowConfig(r0=1.0, n_phi=16))
    again = solution_from_table(sol.radii, sol.u)
    assert np.array_equal(again.u_r, sol.u_r)
    assert np.array_equal(v_infinity(again).v_inf.values, v_infinity(sol).v_inf.values)


@pytest.mark.slow
def test_matches_brute_force_euler():
    n, h = 1024, 1e-5
    phi = phi_grid(n)
    u = 1 + 0.1 * np.cos(phi)
    r = 1.0
    for i in range(int(round(9.0 / h))):
        u = u + h * reference_rhs(1.0 + i * h, u)
    sol = solve(1 + 0.1 * np.cos(phi_grid(256)), FlowConfig(r0=1.0, r_max=10.0))
    assert np.max(np.abs(sol.u[-1] - u[::4])) <= 1e-5


def test_v_infinity_matches_rk4_oracle():
    n = 32
    phi = phi_grid(n)
    u0 = 1 + 0.1 * np.cos(phi)
    # fixed-step RK4 in s = log r up to r = 1e4, where v = v_inf + O(r^-2)
    f = lambda s, u: np.exp(s) * reference_rhs(np.exp(s), u)
    s_end, ds = np.log(1e4), 2e-3
    steps = int(np.ceil(s_end / ds))
    ds = s_end / steps
    u, s = u0.copy(), 0.0
    for _ in range(steps):
        k1 = f(s, u)
        k2 = f(s + ds / 2, u + ds / 2 * k1)
        k3 = f(s + ds / 2, u + ds / 2 * k2)
        k4 = f(s + ds, u + ds * k3)
        u = u + ds / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s += ds
    v_oracle = 1e8 * (u - 1)
    sol = solve(u0, FlowConfig(r0=1.0, n_phi=n))
    assert np.max(np.abs(v_infinity(sol).v_inf.values - v_oracle)) <= 1e-4


def rk4_log_r(u0, radii, ds=5e-4):
    """Fixed-step RK4 in s = log r, sampled at ``radii``."""
    f = lambda s, u: np.exp(s) * reference_rhs(np.exp(s), u)
    out, u, s = [u0.copy()], u0.copy(), np.log(radii[0])
    for target in np.log(radii[1:]):
        steps = max(1, int(np.ceil((target - s) / ds)))
        h = (target - s) / steps
        for _ in range(steps):
            k1 = f(s, u)
            k2 = f(s + h / 2, u + h / 2 * k1)
            k3 = f(s + h / 2, u + h / 2 * k2)
            k4 = f(s + h, u + h * k3)
            u = u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            s += h
        out.append(u.copy())
    return np.array(out)


def test_error_decreases_with_tolerance():
    u0 = 1 + 0.3 * np.cos(phi_grid(32))
    errors = []
    for tol in (1e-7, 1e-8, 1e-9):
        sol = solve(u0, FlowConfig(r0=1.0, r_max=100.0, n_phi=32, tol=tol))
        errors.append(np.max(np.abs(sol.u - rk4_log_r(u0, sol.radii))))
    assert errors[0] / errors[1] >= 5
    assert errors[1] / errors[2] >= 5


@settings(max_examples=4, deadline=None)
@given(a=st.floats(0.6, 1.6), b=st.floats(0.0, 0.3), gap=st.floats(0.0, 0.3), shift=st.integers(0, 15))
def test_comparison_principle_and_shift_equivariance(a, b, gap, shift):
    phi = phi_grid(16)
    lo = a + b * np.cos(phi) * np.sin(2 * phi)
    hi = lo + gap * (1 + np.cos(phi)) / 2
    cfg = FlowConfig(r0=1.0, r_max=20.0, n_phi=16)
    sol_lo, sol_hi = solve(lo, cfg), solve(hi, cfg)
    assert np.all(sol_lo.u <= sol_hi.u + 10 * cfg.tol)
    rolled = solve(np.roll(lo, -shift), cfg)
    assert np.allclose(rolled.u, np.roll(sol_lo.u, -shift, axis=1), atol=10 * cfg.tol)
