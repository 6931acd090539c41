"""Riemannian geometry of 2D metrics on (r, phi) coordinate patches.

Index convention throughout: 0 is r, 1 is phi.  Component triples are
ordered ``(g_rr, g_rphi, g_phiphi)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, GeometryError
from .grid import TWO_PI, phi_grid, real_array

ComponentFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _positive_r(r):
    return r > 0


def _fd_step(r):
    return 1e-4 * np.maximum(1.0, np.abs(r))


def _d1(f, r, phi, axis):
    """Fourth-order centered first derivative of ``f(r, phi)``."""
    if axis == 0:
        h = _fd_step(r)
        s = lambda k: f(r + k * h, phi)
    else:
        h = 1e-4
        s = lambda k: f(r, phi + k * h)
    return (-s(2) + 8 * s(1) - 8 * s(-1) + s(-2)) / (12 * h)


def _d2(f, r, phi, axis):
    if axis == 0:
        h = _fd_step(r)
        s = lambda k: f(r + k * h, phi)
    else:
        h = 1e-4
        s = lambda k: f(r, phi + k * h)
    return (-s(2) + 16 * s(1) - 30 * s(0) + 16 * s(-1) - s(-2)) / (12 * h * h)


@dataclass(frozen=True)
class Metric2D:
    """A Riemannian metric ``g_rr dr^2 + 2 g_rphi dr dphi + g_phiphi dphi^2``.

    ``components(r, phi)`` returns an array of shape ``(3, *shape)``.
    ``first(r, phi)`` returns ``(2, 3, *shape)``: r- then phi-derivatives of
    each component.  ``second(r, phi)`` returns ``(3, 3, *shape)`` with the
    derivative index ordered ``(rr, rphi, phiphi)``.  Missing derivative
    callables fall back to fourth-order centered differences.

    ``regular_origin`` marks metrics whose coordinate disks ``r <= R`` are
    smooth topological disks (the polar singularity at r = 0 is only a
    coordinate artefact).
    """

    components: ComponentFn
    first: ComponentFn | None = None
    second: ComponentFn | None = None
    domain: Callable[[np.ndarray], np.ndarray] = _positive_r
    r_min: float = 0.0
    regular_origin: bool = False
    name: str = "metric"
    info: dict = field(default_factory=dict, compare=False)

    def check_domain(self, r) -> None:
        r = real_array(r)
        ok = np.asarray(self.domain(r))
        if not np.all(ok):
            bad = float(r[~ok].flat[0]) if r.ndim else float(r)
            raise DomainError(f"r = {bad!r} is outside the domain of {self.name}")

    def g(self, r, phi) -> np.ndarray:
        r, phi = np.broadcast_arrays(real_array(r), real_array(phi))
        self.check_domain(r)
        return real_array(self.components(r, phi))

    def dg(self, r, phi) -> np.ndarray:
        r, phi = np.broadcast_arrays(real_array(r), real_array(phi))
        self.check_domain(r)
        if self.first is not None:
            return real_array(self.first(r, phi))
        return np.stack([_d1(self.components, r, phi, 0), _d1(self.components, r, phi, 1)])

    def ddg(self, r, phi) -> np.ndarray:
        r, phi = np.broadcast_arrays(real_array(r), real_array(phi))
        self.check_domain(r)
        if self.second is not None:
            return real_array(self.second(r, phi))
        f = self.components
        rr = _d2(f, r, phi, 0)
        pp = _d2(f, r, phi, 1)
        rp = _d1(lambda rr_, pp_: _d1(f, rr_, pp_, 1), r, phi, 0)
        return np.stack([rr, rp, pp])

    def numerical(self) -> "Metric2D":
        """The same metric with all derivatives taken by finite differences."""
        return Metric2D(
            self.components,
            domain=self.domain,
            r_min=self.r_min,
            regular_origin=self.regular_origin,
            name=self.name + " (finite differences)",
        )


def _as_matrix(comp: np.ndarray) -> np.ndarray:
    """``(3, ...)`` component triple -> symmetric ``(2, 2, ...)`` matrix."""
    return np.stack([np.stack([comp[0], comp[1]]), np.stack([comp[1], comp[2]])])


def inverse(metric: Metric2D, r, phi) -> np.ndarray:
    g = metric.g(r, phi)
    det = g[0] * g[2] - g[1] ** 2
    return _as_matrix(np.stack([g[2], -g[1], g[0]]) / det)


def christoffel(metric: Metric2D, r, phi) -> np.ndarray:
    """Levi-Civita symbols ``Gamma[k, i, j]`` at ``(r, phi)``.

    Shape ``(2, 2, 2, *shape)``; symmetric in the last two indices.
    """
    ginv = inverse(metric, r, phi)
    # dmat[l, i, j] = d_l g_ij
    d = metric.dg(r, phi)
    dmat = np.stack([_as_matrix(d[0]), _as_matrix(d[1])])
    # lowered: Gamma_{l i j} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    low = 0.5 * (
        np.einsum("ijl...->lij...", dmat)
        + np.einsum("jil...->lij...", dmat)
        - dmat
    )
    return np.einsum("kl...,lij...->kij...", ginv, low)


def gauss_curvature(metric: Metric2D, r, phi) -> np.ndarray:
    """Gauss curvature by the Brioschi formula (u = r, v = phi)."""
    E, F, G = metric.g(r, phi)
    (Eu, Fu, Gu), (Ev, Fv, Gv) = metric.dg(r, phi)
    dd = metric.ddg(r, phi)
    Evv = dd[2, 0]
    Fuv = dd[1, 1]
    Guu = dd[0, 2]
    zero = np.zeros_like(E)
    a = np.array([
        [-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev],
        [Fv - 0.5 * Gu, E, F],
        [0.5 * Gv, F, G],
    ])
    b = np.array([
        [zero, 0.5 * Ev, 0.5 * Gu],
        [0.5 * Ev, E, F],
        [0.5 * Gu, F, G],
    ])
    det_a = np.linalg.det(np.moveaxis(a, (0, 1), (-2, -1)))
    det_b = np.linalg.det(np.moveaxis(b, (0, 1), (-2, -1)))
    return (det_a - det_b) / (E * G - F * F) ** 2


def scalar_curvature(metric: Metric2D, r, phi) -> np.ndarray:
    return 2.0 * gauss_curvature(metric, r, phi)


@dataclass(frozen=True)
class ParametricCurve:
    """A closed curve ``phi -> (r(phi), phi)`` in polar-type coordinates.

    ``orientation = +1`` measures curvature against the conormal pointing
    to increasing r.
    """

    r: Callable[[np.ndarray], np.ndarray]
    dr: Callable[[np.ndarray], np.ndarray]
    ddr: Callable[[np.ndarray], np.ndarray]
    orientation: int = 1
    name: str = "curve"

    @classmethod
    def circle(cls, radius: float) -> "ParametricCurve":
        radius = float(radius)
        const = lambda phi: np.full(np.shape(phi), radius)
        zero = lambda phi: np.zeros(np.shape(phi))
        return cls(const, zero, zero, name=f"circle r={radius:g}")

    def point(self, phi):
        phi = real_array(phi)
        return np.broadcast_to(self.r(phi), phi.shape), phi


def _curve_frame(metric: Metric2D, curve: ParametricCurve, phi):
    phi = real_array(phi)
    r = np.broadcast_to(real_array(curve.r(phi)), phi.shape)
    dr = np.broadcast_to(real_array(curve.dr(phi)), phi.shape)
    g = metric.g(r, phi)
    speed2 = g[0] * dr * dr + 2 * g[1] * dr + g[2]
    return phi, r, dr, g, speed2


def curve_length_element(metric: Metric2D, curve: ParametricCurve, phi) -> np.ndarray:
    """``dl/dphi`` of the induced metric along ``curve``."""
    _, _, _, _, speed2 = _curve_frame(metric, curve, phi)
    if np.any(speed2 <= 0):
        raise GeometryError(f"degenerate tangent on {curve.name}")
    return np.sqrt(speed2)


def geodesic_curvature(metric: Metric2D, curve: ParametricCurve, phi) -> np.ndarray:
    """Geodesic curvature of ``curve`` at parameter ``phi``.

    Sign: positive when the curve bends away from its outward conormal, so
    coordinate circles in the hyperbolic plane have k > 0.
    """
    phi, r, dr, g, speed2 = _curve_frame(metric, curve, phi)
    if np.any(speed2 <= 0):
        raise GeometryError(f"degenerate tangent on {curve.name}")
    ddr = np.broadcast_to(real_array(curve.ddr(phi)), phi.shape)
    gam = christoffel(metric, r, phi)
    vel = np.stack([dr, np.ones_like(dr)])
    acc = np.stack([ddr, np.zeros_like(ddr)]) + np.einsum("kij...,i...,j...->k...", gam, vel, vel)
    sqrt_det = np.sqrt(g[0] * g[2] - g[1] ** 2)
    k = sqrt_det * (vel[0] * acc[1] - vel[1] * acc[0]) / speed2 ** 1.5
    return curve.orientation * k


def curve_length(metric: Metric2D, curve: ParametricCurve, n: int = 256) -> float:
    return float(TWO_PI * np.mean(curve_length_element(metric, curve, phi_grid(n))))


def total_geodesic_curvature(metric: Metric2D, curve: ParametricCurve, n: int = 256) -> float:
    """``integral of k ds`` by the periodic trapezoid rule on ``n`` samples."""
    phi = phi_grid(n)
    k = geodesic_curvature(metric, curve, phi)
    dl = curve_length_element(metric, curve, phi)
    return float(TWO_PI * np.mean(k * dl))
