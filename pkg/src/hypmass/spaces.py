"""Constructors for the concrete metrics: hyperbolic plane, BTZ slices,
flow metrics built from a solved ``u`` grid, and ALH metrics with a
prescribed mass aspect."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .errors import InputError
from .geometry import Metric2D
from .grid import PeriodicGridFunction, phi_grid, wavenumbers


def _stack(a, b, c, like):
    return np.stack(np.broadcast_arrays(a, b, c, like)[:3])


def euclidean() -> Metric2D:
    """Flat plane in polar coordinates, ``dr^2 + r^2 dphi^2``."""

    def comps(r, phi):
        return _stack(1.0, 0.0, r * r, r)

    def first(r, phi):
        z = np.zeros_like(r)
        return np.stack([_stack(z, z, 2 * r, r), _stack(z, z, z, r)])

    def second(r, phi):
        z = np.zeros_like(r)
        return np.stack([_stack(z, z, 2 + z, r), _stack(z, z, z, r), _stack(z, z, z, r)])

    return Metric2D(comps, first, second, regular_origin=True, name="euclidean")


def hyperbolic() -> Metric2D:
    """``dr^2/(1+r^2) + r^2 dphi^2``."""

    def comps(r, phi):
        return _stack(1.0 / (1.0 + r * r), 0.0, r * r, r)

    def first(r, phi):
        s = 1.0 + r * r
        z = np.zeros_like(r)
        return np.stack([_stack(-2 * r / s**2, z, 2 * r, r), _stack(z, z, z, r)])

    def second(r, phi):
        s = 1.0 + r * r
        z = np.zeros_like(r)
        rr = _stack((6 * r * r - 2) / s**3, z, 2 + z, r)
        return np.stack([rr, _stack(z, z, z, r), _stack(z, z, z, r)])

    return Metric2D(comps, first, second, regular_origin=True, name="hyperbolic")


def btz(m: float) -> Metric2D:
    """Time-symmetric BTZ slice ``dr^2/(r^2 - m) + r^2 dphi^2``.

    Defined for ``r^2 > max(m, 0)``.  Only ``m = -1`` closes smoothly at
    the origin; ``m > 0`` has a horizon at ``r = sqrt(m)``, ``m = 0`` is the
    trumpet and other negative ``m`` carry a conical singularity.
    """
    m = float(m)
    r_min = np.sqrt(max(m, 0.0))

    def domain(r):
        return (r > 0) & (r * r > m)

    def comps(r, phi):
        return _stack(1.0 / (r * r - m), 0.0, r * r, r)

    def first(r, phi):
        s = r * r - m
        z = np.zeros_like(r)
        return np.stack([_stack(-2 * r / s**2, z, 2 * r, r), _stack(z, z, z, r)])

    def second(r, phi):
        s = r * r - m
        z = np.zeros_like(r)
        rr = _stack((6 * r * r + 2 * m) / s**3, z, 2 + z, r)
        return np.stack([rr, _stack(z, z, z, r), _stack(z, z, z, r)])

    return Metric2D(comps, first, second, domain=domain, r_min=r_min,
                    regular_origin=(m == -1.0), name=f"btz(m={m:g})", info={"m": m})


class _RadialFourierTable:
    """``U(r, phi)`` tabulated on ``r_grid x phi_grid``; cubic in r,
    trigonometric in phi.  The r-interpolation acts on Fourier coefficients,
    which is equivalent and lets phi-derivatives come out exactly."""

    def __init__(self, r_grid, u, u_r=None):
        n = u.shape[1]
        k = wavenumbers(n)
        w = np.full(k.shape, 2.0)
        w[0] = 1.0
        if n % 2 == 0:
            w[-1] = 1.0
        coef = np.fft.rfft(u, axis=1) / n * w
        if u_r is None:
            self.spline = CubicSpline(r_grid, coef, axis=0)
        else:
            dcoef = np.fft.rfft(u_r, axis=1) / n * w
            self.spline = CubicHermiteSpline(r_grid, coef, dcoef, axis=0)
        self.k = k
        self.nyquist = n % 2 == 0

    def __call__(self, r, phi, dr=0, dphi=0):
        shape = np.shape(r)
        c = self.spline(np.ravel(r), dr)
        mult = (1j * self.k) ** dphi
        if self.nyquist and dphi % 2 == 1:
            mult = mult.copy()
            mult[-1] = 0.0
        basis = np.exp(1j * np.multiply.outer(np.ravel(phi), self.k))
        return np.real(np.sum(c * mult * basis, axis=-1)).reshape(shape)


def flow_metric(u_grid, r_grid, u_r=None) -> Metric2D:
    """``g^u = u^2 dr^2/(1+r^2) + r^2 dphi^2`` from a tabulated ``u``.

    ``u_grid`` has shape ``(len(r_grid), n_phi)``.  When the radial
    derivative ``u_r`` is supplied (the flow solver records it) the radial
    interpolation is cubic Hermite, otherwise a natural-boundary-free cubic
    spline.
    """
    u = np.asarray(u_grid, dtype=float)
    r_grid = np.asarray(r_grid, dtype=float)
    if u.ndim != 2 or u.shape[0] != r_grid.size:
        raise InputError("u_grid must have shape (len(r_grid), n_phi)")
    if np.any(u <= 0):
        raise InputError("flow metric needs u > 0")
    if r_grid.size < 2 or np.any(np.diff(r_grid) <= 0):
        raise InputError("r_grid must be strictly increasing with >= 2 entries")
    table = _RadialFourierTable(r_grid, u, None if u_r is None else np.asarray(u_r, float))
    lo, hi = float(r_grid[0]), float(r_grid[-1])
    span = hi - lo

    def domain(r):
        # tolerate round-off at the ends of the table
        return (r >= lo - 1e-12 * span) & (r <= hi + 1e-12 * span)

    def comps(r, phi):
        U = table(r, phi)
        return _stack(U * U / (1 + r * r), 0.0, r * r, r)

    def first(r, phi):
        s = 1 + r * r
        U, Ur, Up = table(r, phi), table(r, phi, dr=1), table(r, phi, dphi=1)
        z = np.zeros_like(r)
        grr_r = 2 * U * Ur / s - 2 * r * U * U / s**2
        return np.stack([_stack(grr_r, z, 2 * r, r), _stack(2 * U * Up / s, z, z, r)])

    def second(r, phi):
        s = 1 + r * r
        U = table(r, phi)
        Ur, Up = table(r, phi, dr=1), table(r, phi, dphi=1)
        Urr, Urp, Upp = table(r, phi, dr=2), table(r, phi, 1, 1), table(r, phi, dphi=2)
        z = np.zeros_like(r)
        grr_rr = (2 * (Ur * Ur + U * Urr) / s - 8 * r * U * Ur / s**2
                  + U * U * (6 * r * r - 2) / s**3)
        grr_rp = 2 * (Ur * Up + U * Urp) / s - 4 * r * U * Up / s**2
        grr_pp = 2 * (Up * Up + U * Upp) / s
        return np.stack([_stack(grr_rr, z, 2 + z, r), _stack(grr_rp, z, z, r),
                         _stack(grr_pp, z, z, r)])

    return Metric2D(comps, first, second, domain=domain, r_min=lo, name="flow metric g^u")


def _as_profile(value, n: int) -> PeriodicGridFunction:
    if isinstance(value, PeriodicGridFunction):
        return value
    if callable(value):
        return PeriodicGridFunction.from_function(value, n)
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return PeriodicGridFunction.constant(float(arr), n)
    return PeriodicGridFunction(arr)


@dataclass(frozen=True)
class MassAspect:
    """Mass aspect ``(mu11, mu12, mu22)`` of an ALH metric tail."""

    mu11: PeriodicGridFunction
    mu12: PeriodicGridFunction
    mu22: PeriodicGridFunction

    @classmethod
    def from_functions(cls, mu11=0.0, mu12=0.0, mu22=0.0, n: int = 256) -> "MassAspect":
        """Each entry may be a constant, a callable of phi, or grid samples."""
        return cls(_as_profile(mu11, n), _as_profile(mu12, n), _as_profile(mu22, n))

    @property
    def mass_aspect_function(self) -> PeriodicGridFunction:
        n = max(self.mu11.n, self.mu22.n)
        return PeriodicGridFunction(self.mu22.resample(n).values + 2 * self.mu11.resample(n).values)


def hamiltonian_mass(aspect: MassAspect) -> float:
    """``(1/2pi) * integral of (mu22 + 2 mu11) dphi``."""
    return aspect.mass_aspect_function.mean()


def _alh_components(aspect: MassAspect, r, phi, order):
    A = [aspect.mu11(phi, d) for d in range(3)]
    B = [aspect.mu12(phi, d) for d in range(3)]
    C = [aspect.mu22(phi, d) for d in range(3)]
    s = 1 + r * r
    p = r * r + r**4
    p1 = 2 * r + 4 * r**3
    p2 = 2 + 12 * r * r
    h = 1 / p
    h1 = -p1 / p**2
    h2 = (2 * p1 * p1 - p * p2) / p**3
    j = p**-0.5
    j1 = -0.5 * p1 * p**-1.5
    j2 = 0.75 * p1 * p1 * p**-2.5 - 0.5 * p2 * p**-1.5
    z = np.zeros_like(r)
    if order == 0:
        return _stack(1 / s + C[0] * h, B[0] * j, r * r + A[0], r)
    if order == 1:
        d_r = _stack(-2 * r / s**2 + C[0] * h1, B[0] * j1, 2 * r, r)
        d_p = _stack(C[1] * h, B[1] * j, A[1], r)
        return np.stack([d_r, d_p])
    d_rr = _stack((6 * r * r - 2) / s**3 + C[0] * h2, B[0] * j2, 2 + z, r)
    d_rp = _stack(C[1] * h1, B[1] * j1, z, r)
    d_pp = _stack(C[2] * h, B[2] * j, A[2], r)
    return np.stack([d_rr, d_rp, d_pp])


def _alh_r_min(aspect: MassAspect) -> float:
    """Twice the smallest search radius beyond which the metric, measured in
    the hyperbolic orthonormal coframe, has eigenvalues above 1e-6."""
    radii = np.geomspace(1e-3, 1e3, 241)
    phi = phi_grid(64)
    R, P = np.meshgrid(radii, phi, indexing="ij")
    g = _alh_components(aspect, R, P, 0)
    # rescale to the coframe dr/sqrt(1+r^2), r dphi
    a = g[0] * (1 + R * R)
    b = g[1] * np.sqrt(1 + R * R) / R
    c = g[2] / (R * R)
    tr, det = a + c, a * c - b * b
    lam_min = 0.5 * (tr - np.sqrt(np.maximum(tr * tr - 4 * det, 0.0)))
    good = np.all(lam_min > 1e-6, axis=1) & np.all(g[2] > 0, axis=1)
    bad = np.flatnonzero(~good)
    if bad.size == 0:
        return 2.0 * radii[0]
    if bad[-1] == radii.size - 1:
        raise InputError("mass aspect gives no positive-definite region on r <= 1e3")
    return 2.0 * float(radii[bad[-1] + 1])


def alh_metric(aspect: MassAspect) -> Metric2D:
    """ALH metric with mass aspect ``aspect`` and the O(r^-3) remainder set to zero::

        (1/(1+r^2) + mu22/(r^2 (1+r^2))) dr^2 + 2 mu12/(r sqrt(1+r^2)) dr dphi
            + (r^2 + mu11) dphi^2
    """
    r_min = _alh_r_min(aspect)

    def domain(r):
        return r >= r_min

    return Metric2D(
        lambda r, phi: _alh_components(aspect, r, phi, 0),
        lambda r, phi: _alh_components(aspect, r, phi, 1),
        lambda r, phi: _alh_components(aspect, r, phi, 2),
        domain=domain,
        r_min=r_min,
        name="ALH metric",
    )
