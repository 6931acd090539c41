"""Outward parabolic extension with prescribed scalar curvature -2.

The unknown ``u(r, phi) > 0`` defines ``g^u = u^2 dr^2/(1+r^2) + r^2 dphi^2``
and solves

    u_r = u^2 u_phiphi / (r (1 + r^2)) - r (u^3 - u) / (1 + r^2),

with r as the evolution variable.  The solver is a linearly implicit IMEX
Runge-Kutta method (ARS(2,2,2)): the diffusion operator with its
coefficient frozen at the start of the step is implicit, everything else
explicit.  Step size is controlled by step doubling with local
extrapolation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import (BarrierViolationError, HypothesisError, InputError,
                     StiffnessError, TailFitError)
from .grid import PeriodicGridFunction, as_values, second_derivative_matrix, spectral_derivative

log = logging.getLogger(__name__)

# ARS(2,2,2) coefficients
_GAMMA = 1.0 - 1.0 / np.sqrt(2.0)
_DELTA = 1.0 - 1.0 / (2.0 * _GAMMA)


@dataclass(frozen=True)
class FlowConfig:
    """Solver parameters.

    ``tail_fit_window`` is a radius ratio: the tail fit uses the records
    with ``r >= r_max / tail_fit_window`` (default: the last decade).

    States are recorded at checkpoints ``r0 * checkpoint_ratio**j`` and at
    ``records_per_checkpoint`` log-uniform points per checkpoint interval.
    Near r0 angular modes decay at a log-rate ~ 1/(1+r^2), so an interval
    starting at ``a`` gets ``ceil(record_refinement / (1+a^2))`` times as
    many records (never fewer than the base count).
    """

    r0: float
    r_max: float = 1e3
    n_phi: int = 256
    tol: float = 1e-8
    tail_fit_window: float = 10.0
    checkpoint_ratio: float = 1.2
    records_per_checkpoint: int = 8
    record_refinement: float = 8.0
    max_steps: int = 500_000

    def __post_init__(self):
        if not (self.r0 > 0 and self.r_max > self.r0):
            raise InputError(f"need r_max > r0 > 0, got r0={self.r0}, r_max={self.r_max}")
        if self.n_phi < 16 or self.n_phi % 2:
            raise InputError(f"n_phi must be even and >= 16, got {self.n_phi}")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if not self.tail_fit_window > 1:
            raise InputError("tail_fit_window must exceed 1")
        if not self.checkpoint_ratio > 1:
            raise InputError("checkpoint_ratio must exceed 1")
        if self.records_per_checkpoint < 1:
            raise InputError("records_per_checkpoint must be >= 1")
        if not self.record_refinement >= 0:
            raise InputError("record_refinement must be non-negative")

    @property
    def tol_barrier(self) -> float:
        return 10.0 * self.tol


def explicit_solution(K: float, r):
    """Solution ``(1 + K/(1+r^2))^(-1/2)`` of the phi-independent ODE."""
    r = np.asarray(r, dtype=float)
    return (1.0 + K / (1.0 + r * r)) ** -0.5


def ode_constant(c: float, r0: float) -> float:
    """The constant ``K`` for which ``explicit_solution(K, r0) == c``."""
    return (1.0 / (c * c) - 1.0) * (1.0 + r0 * r0)


@dataclass(frozen=True)
class Barriers:
    """ODE solutions ``f1 >= u >= min(1, f2)`` fixed by the initial data."""

    K1: float
    K2: float

    @classmethod
    def from_initial(cls, u0, r0: float) -> "Barriers":
        u0 = as_values(u0)
        return cls(ode_constant(u0.max(), r0), ode_constant(u0.min(), r0))

    def f1(self, r):
        return explicit_solution(self.K1, r)

    def f2(self, r):
        return explicit_solution(self.K2, r)

    def lower(self, r):
        return np.minimum(1.0, self.f2(r))

    def violation(self, r: float, u) -> float:
        """Largest excursion of ``u`` outside the envelope at radius ``r`` (<= 0 if inside)."""
        u = as_values(u)
        return float(max(u.max() - self.f1(r), self.lower(r) - u.min()))


@dataclass(frozen=True)
class FlowState:
    r: float
    u: PeriodicGridFunction
    step: float
    barriers: Barriers
    accepted_steps: int = 0
    rejected_steps: int = 0


def boundary_data_from_curvature(k, r0: float) -> PeriodicGridFunction:
    """Initial data ``u0 = sqrt(1+r0^2) / (r0 k)`` matching the curvature ``k``
    of the boundary curve to that of the circle ``r = r0`` in ``g^u``."""
    k = as_values(k)
    if np.any(~(k > 0)):
        raise HypothesisError("boundary geodesic curvature must be positive everywhere")
    return PeriodicGridFunction(np.sqrt(1.0 + r0 * r0) / (r0 * k))


def _rhs_values(r: float, u: np.ndarray) -> np.ndarray:
    s = 1.0 + r * r
    upp = spectral_derivative(u, 2)
    return u * u * upp / (r * s) - r * u * (u - 1.0) * (u + 1.0) / s


def rhs(r: float, u) -> PeriodicGridFunction:
    """``u_r`` as given by the flow equation, with a spectral ``u_phiphi``."""
    u = as_values(u)
    if r <= 0:
        raise InputError("r must be positive")
    if np.any(u <= 0):
        raise InputError("u must be positive")
    return PeriodicGridFunction(_rhs_values(float(r), u))


@lru_cache(maxsize=8)
def _d2_matrix(n: int) -> np.ndarray:
    return second_derivative_matrix(n)


def _implicit_solver(a: np.ndarray, c: float):
    """Solver for ``(I - c * diag(a) * D2) x = b``.

    Once ``c * max(a) * (n/2)^2`` is small the operator is a contraction
    and the system is solved by fixed-point iteration with FFT second
    derivatives; otherwise by a dense LU factorization.
    """
    n = a.size
    rho = c * float(a.max()) * (n / 2) ** 2
    if rho < 0.5:
        def solve_(b):
            x = b
            for _ in range(200):
                x_new = b + c * a * spectral_derivative(x, 2)
                if np.max(np.abs(x_new - x)) <= 4e-16 * np.max(np.abs(x_new)):
                    return x_new
                x = x_new
            return x_new
        return solve_
    lu = lu_factor(np.eye(n) - c * (a[:, None] * _d2_matrix(n)))
    return lambda b: lu_solve(lu, b)


def _ars222(r: float, u: np.ndarray, h: float) -> np.ndarray:
    """One ARS(2,2,2) step with the implicit part ``a(r, u_n) * D2``."""
    a = u * u / (r * (1.0 + r * r))
    lop = lambda y: a * spectral_derivative(y, 2)
    solve_ = _implicit_solver(a, h * _GAMMA)
    n1 = _rhs_values(r, u) - lop(u)
    y2 = solve_(u + h * _GAMMA * n1)
    ly2 = lop(y2)
    n2 = _rhs_values(r + _GAMMA * h, y2) - ly2
    return solve_(u + h * (_DELTA * n1 + (1 - _DELTA) * n2 + (1 - _GAMMA) * ly2))


def _error_weight(r: float) -> float:
    # errors in u are measured at the scale of r^2 (u - 1), which the tail
    # and the mass functional both amplify
    return 1.0 + r * r


def step(state: FlowState, config: FlowConfig, r_stop: float | None = None) -> FlowState:
    """Advance by one accepted adaptive step (never past ``r_stop``)."""
    r = state.r
    u = state.u.values
    h = state.step
    rejected = state.rejected_steps
    barrier_failures = 0
    while True:
        h_try = h if r_stop is None else min(h, r_stop - r)
        if h_try < 1e-14 * r:
            if barrier_failures:
                raise BarrierViolationError(
                    f"barrier envelope violated at r = {r:.6g} for every admissible step")
            raise StiffnessError(f"step size underflow at r = {r:.6g} (h = {h_try:.3g})")
        big = _ars222(r, u, h_try)
        half = _ars222(r, u, 0.5 * h_try)
        small = _ars222(r + 0.5 * h_try, half, 0.5 * h_try)
        diff = small - big
        r_new = r + h_try
        err = float(np.max(np.abs(diff))) / 3.0 * _error_weight(r_new)
        fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * (config.tol / err) ** (1.0 / 3.0)))
        if not np.all(np.isfinite(small)) or err > config.tol:
            rejected += 1
            h = h_try * min(fac, 0.5)
            continue
        u_new = small + diff / 3.0
        if state.barriers.violation(r_new, u_new) > config.tol_barrier:
            barrier_failures += 1
            rejected += 1
            h = 0.5 * h_try
            continue
        # a step shortened to land on r_stop does not shrink the proposal
        h_next = max(h, h_try * fac) if h_try < h else h_try * fac
        return FlowState(r_new, PeriodicGridFunction(u_new), h_next, state.barriers,
                         state.accepted_steps + 1, rejected)


def record_radii(config: FlowConfig) -> tuple[np.ndarray, np.ndarray]:
    """Checkpoints at ratio ``checkpoint_ratio`` plus log-uniform records
    between them (see :class:`FlowConfig`).

    Returns the radii and a mask selecting the checkpoints; ``r0`` and
    ``r_max`` are always checkpoints.
    """
    log_q = np.log(config.checkpoint_ratio)
    log_span = np.log(config.r_max / config.r0)
    radii, mask = [], []
    j = 0
    while j * log_q < log_span * (1 - 1e-12):
        a = config.r0 * config.checkpoint_ratio**j
        boost = max(1, int(np.ceil(config.record_refinement / (1.0 + a * a))))
        n_sub = config.records_per_checkpoint * boost
        width = min(log_q, log_span - j * log_q)
        n_sub = max(1, int(np.ceil(n_sub * width / log_q - 1e-9)))
        for i in range(n_sub):
            radii.append(a * np.exp(width * i / n_sub))
            mask.append(i == 0)
        j += 1
    radii.append(config.r_max)
    mask.append(True)
    return np.array(radii), np.array(mask)


@dataclass(frozen=True)
class FlowSolution:
    """Recorded states of a flow run.

    ``u`` and ``u_r`` have shape ``(len(radii), n_phi)``.
    """

    config: FlowConfig
    radii: np.ndarray
    u: np.ndarray
    u_r: np.ndarray
    is_checkpoint: np.ndarray
    barriers: Barriers
    accepted_steps: int
    rejected_steps: int
    max_barrier_violation: float = field(default=0.0)

    @property
    def n_phi(self) -> int:
        return self.u.shape[1]

    @property
    def v(self) -> np.ndarray:
        """``r^2 (u - 1)`` at every record."""
        return self.radii[:, None] ** 2 * (self.u - 1.0)

    @property
    def r0(self) -> float:
        return float(self.radii[0])

    def state(self, i: int) -> PeriodicGridFunction:
        return PeriodicGridFunction(self.u[i])


def solve(u0, config: FlowConfig) -> FlowSolution:
    """Integrate from ``config.r0`` to ``config.r_max``.

    States are stored at geometric checkpoints (and their midpoints); the
    barrier envelope is re-verified at every one of them.
    """
    u0 = as_values(u0)
    if u0.ndim != 1:
        raise InputError("u0 must be one-dimensional")
    if np.any(~(u0 > 0)):
        raise InputError("u0 must be positive")
    if u0.size != config.n_phi:
        u0 = PeriodicGridFunction(u0).resample(config.n_phi).values
        if np.any(u0 <= 0):
            raise InputError("resampled u0 is not positive")
    barriers = Barriers.from_initial(u0, config.r0)
    radii, mask = record_radii(config)
    state = FlowState(config.r0, PeriodicGridFunction(u0), 1e-3 * config.r0, barriers)
    us = [u0.copy()]
    worst = barriers.violation(config.r0, u0)
    for target in radii[1:]:
        while state.r < target * (1 - 1e-13):
            state = step(state, config, r_stop=target)
            if state.accepted_steps > config.max_steps:
                raise StiffnessError(f"exceeded {config.max_steps} steps before r = {target:.6g}")
        state = FlowState(float(target), state.u, state.step, barriers,
                          state.accepted_steps, state.rejected_steps)
        viol = barriers.violation(target, state.u)
        if viol > config.tol_barrier:
            raise BarrierViolationError(f"barrier envelope violated by {viol:.3g} at r = {target:.6g}")
        worst = max(worst, viol)
        us.append(state.u.values.copy())
    u = np.array(us)
    u_r = np.array([_rhs_values(float(r), row) for r, row in zip(radii, u)])
    log.debug("flow: %d accepted, %d rejected steps", state.accepted_steps, state.rejected_steps)
    return FlowSolution(config, radii, u, u_r, mask, barriers,
                        state.accepted_steps, state.rejected_steps, worst)


@dataclass(frozen=True)
class TailFit:
    """Per-angle least-squares fit ``v(r) = v_inf + b/r^2 + c/r^4``."""

    v_inf: PeriodicGridFunction
    b: np.ndarray
    c: np.ndarray
    residual: float
    radii: np.ndarray


def v_infinity(solution: FlowSolution) -> TailFit:
    """Extract ``v_inf = lim r^2 (u - 1)`` from the tail of ``solution``."""
    cfg = solution.config
    if not np.isclose(solution.radii[-1], cfg.r_max):
        raise TailFitError("solution did not reach r_max")
    sel = solution.radii >= cfg.r_max / cfg.tail_fit_window * (1 - 1e-12)
    radii = solution.radii[sel]
    if radii.size < 4:
        raise TailFitError("fewer than four records in the tail window; increase r_max or the window")
    x = (radii[0] / radii) ** 2
    design = np.stack([np.ones_like(x), x, x * x], axis=1)
    v = solution.v[sel]
    coef, *_ = np.linalg.lstsq(design, v, rcond=None)
    residual = float(np.max(np.abs(design @ coef - v)))
    if residual > 1e3 * cfg.tol:
        raise TailFitError(f"tail fit residual {residual:.3g} exceeds {1e3 * cfg.tol:.3g}; "
                           "try a larger r_max")
    scale = radii[0] ** 2
    return TailFit(PeriodicGridFunction(coef[0]), coef[1] * scale, coef[2] * scale**2,
                   residual, radii)


def solution_from_table(radii, u, tol: float = 1e-8, tail_fit_window: float = 10.0) -> FlowSolution:
    """Rebuild a :class:`FlowSolution` from stored ``u`` records (e.g. a CSV dump).

    ``u_r`` is recomputed from the flow equation.
    """
    radii = np.asarray(radii, dtype=float)
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[0] != radii.size or radii.size < 2:
        raise InputError("u must have shape (len(radii), n_phi) with at least two radii")
    if np.any(u <= 0):
        raise InputError("u must be positive")
    config = FlowConfig(r0=float(radii[0]), r_max=float(radii[-1]), n_phi=u.shape[1],
                        tol=tol, tail_fit_window=tail_fit_window)
    u_r = np.array([_rhs_values(float(r), row) for r, row in zip(radii, u)])
    barriers = Barriers.from_initial(u[0], config.r0)
    worst = max(barriers.violation(r, row) for r, row in zip(radii, u))
    mask = np.ones(radii.size, dtype=bool)
    return FlowSolution(config, radii, u, u_r, mask, barriers, 0, 0, worst)
