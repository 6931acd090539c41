"""BYST mass of large ellipses in BTZ slices.

The ellipse ``Sigma_R`` is ``r^2 cos^2 phi + r^2 sin^2 phi / (1+eps)^2 = R^2``
in ``g_m = dr^2/(r^2 - m) + r^2 dphi^2``.  As R grows its geodesic
curvature is ``1 - k2(phi)/R^2 + O(R^-3)`` and its length element is
``l1 R + l2/R + O(R^-3)``; the BYST mass tends to

    m_inf(m, eps) = (1/pi) * integral of (1/2 + k2 c^2) dphi,   c = mean(l1).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError
from .geometry import ParametricCurve, geodesic_curvature
from .grid import PeriodicGridFunction, phi_grid, real_array
from .io import write_csv
from .mass import byst_mass_dphi
from .spaces import btz

N_PHI = 512


@dataclass(frozen=True)
class EllipseSpec:
    m: float
    eps: float
    R: float

    def __post_init__(self):
        if not self.eps > -1:
            raise InputError(f"eps must exceed -1, got {self.eps}")
        if not self.R > 0:
            raise InputError(f"R must be positive, got {self.R}")
        if not self.r_smallest > np.sqrt(max(self.m, 0.0)):
            raise DomainError(
                f"ellipse (eps={self.eps}, R={self.R}) meets the horizon r = sqrt({self.m})")

    @property
    def r_smallest(self) -> float:
        return self.R * min(1.0, 1.0 + self.eps)


def _ellipse_q(eps: float, phi):
    a = 1.0 / (1.0 + eps) ** 2
    s, c = np.sin(phi), np.cos(phi)
    q = c * c + a * s * s
    dq = (a - 1.0) * np.sin(2 * phi)
    ddq = 2.0 * (a - 1.0) * np.cos(2 * phi)
    return q, dq, ddq


def ellipse_curve(spec: EllipseSpec) -> ParametricCurve:
    """``r(phi) = R / sqrt(cos^2 phi + sin^2 phi/(1+eps)^2)`` with exact derivatives."""
    R, eps = spec.R, spec.eps

    def r(phi):
        q, _, _ = _ellipse_q(eps, real_array(phi))
        return R * q**-0.5

    def dr(phi):
        q, dq, _ = _ellipse_q(eps, real_array(phi))
        return -0.5 * R * q**-1.5 * dq

    def ddr(phi):
        q, dq, ddq = _ellipse_q(eps, real_array(phi))
        return R * (0.75 * q**-2.5 * dq * dq - 0.5 * q**-1.5 * ddq)

    return ParametricCurve(r, dr, ddr, name=f"ellipse(m={spec.m:g}, eps={spec.eps:g}, R={spec.R:g})")


def _denominator(eps, phi):
    return 2 + 2 * eps + eps**2 + eps * (2 + eps) * np.cos(2 * phi)


def k2_closed_form(m: float, eps: float, phi) -> np.ndarray:
    """Coefficient of ``-1/R^2`` in the geodesic curvature of ``Sigma_R``.

    The ``m eps^2`` coefficient is 20; the ``eps^3`` terms are
    ``(28 + 12 m) eps^3``.
    """
    e = eps
    phi = np.asarray(phi, dtype=float)
    num = (8 * m + 16 * m * e + 28 * e**2 + 20 * m * e**2 + 28 * e**3 + 12 * m * e**3
           + 7 * e**4 + 3 * m * e**4
           + 4 * (2 + m) * e * (4 + 6 * e + 4 * e**2 + e**3) * np.cos(2 * phi)
           + (1 + m) * e**2 * (2 + e) ** 2 * np.cos(4 * phi))
    return num / (8 * (1 + e) ** 2 * _denominator(e, phi))


def l1_closed_form(eps: float, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    return np.sqrt(2 * (1 + eps) ** 2 / _denominator(eps, phi))


def l2_closed_form(eps: float, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    return (np.sqrt(2) * eps**2 * (2 + eps) ** 2 * np.cos(phi) ** 2 * np.sin(phi) ** 2
            / ((1 + eps) * _denominator(eps, phi) ** 1.5))


@dataclass(frozen=True)
class AsymptoticIngredients:
    k2: PeriodicGridFunction
    l1: PeriodicGridFunction
    l2: PeriodicGridFunction
    c: float


def ingredients(m: float, eps: float, n_phi: int = N_PHI) -> AsymptoticIngredients:
    if not eps > -1:
        raise InputError(f"eps must exceed -1, got {eps}")
    phi = phi_grid(n_phi)
    l1 = PeriodicGridFunction(l1_closed_form(eps, phi))
    return AsymptoticIngredients(
        PeriodicGridFunction(k2_closed_form(m, eps, phi)),
        l1,
        PeriodicGridFunction(l2_closed_form(eps, phi)),
        l1.mean(),
    )


def m_infinity(m: float, eps: float, n_phi: int = N_PHI) -> float:
    """Large-R limit of the BYST mass of ``Sigma_R``."""
    ing = ingredients(m, eps, n_phi)
    return float(2.0 * np.mean(0.5 + ing.k2.values * ing.c**2))


def richardson(values, ratio: float, powers) -> float:
    """Eliminate error terms ``h^p`` (p in ``powers``) from values computed at
    ``h, h/ratio, h/ratio^2, ...``; returns the extrapolated limit."""
    table = [np.asarray(v, dtype=float) for v in values]
    if len(table) < len(powers) + 1:
        raise ValueError("need one more value than eliminated powers")
    for p in powers:
        f = ratio**p
        table = [(f * fine - coarse) / (f - 1) for coarse, fine in zip(table[:-1], table[1:])]
    return table[-1]


def k2_oracle_check(m: float, eps: float, phi, radii=(1e2, 2e2, 4e2)) -> np.ndarray:
    """Numerical ``k2``: ``R^2 (1 - k)`` on ``Sigma_R`` at the given radii,
    Richardson-extrapolated in ``1/R`` (the expansion is in even powers)."""
    metric = btz(m)
    est = []
    for R in radii:
        curve = ellipse_curve(EllipseSpec(m, eps, R))
        est.append(R * R * (1.0 - geodesic_curvature(metric, curve, phi)))
    ratio = radii[1] / radii[0]
    return richardson(est, ratio, [2, 4][: len(radii) - 1])


def byst_at_radius(spec: EllipseSpec, n_phi: int = N_PHI) -> float:
    """BYST mass of ``Sigma_R`` from the geometry alone (no series).

    Evaluated in extended precision: ``k_hat - k`` is O(R^-2) and is
    multiplied by O(R^2), so double precision loses ~eps R^2 absolute.
    """
    return byst_mass_dphi(btz(spec.m), ellipse_curve(spec), n_phi, dtype=np.longdouble)


def _worker_count() -> int:
    raw = os.environ.get("HYPMASS_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise InputError(f"HYPMASS_THREADS must be an integer, got {raw!r}") from exc


def default_eps_grid() -> np.ndarray:
    return np.round(np.arange(41) * 0.05, 10)


def fig1_sweep(m_list=(1.0, 0.0, -1.0), eps_grid=None, n_phi: int = N_PHI):
    """Rows ``(m, eps, m_inf)`` in the order of ``m_list`` x ``eps_grid``."""
    eps_grid = default_eps_grid() if eps_grid is None else np.asarray(eps_grid, float)
    if np.any(eps_grid <= -1):
        raise InputError("all eps must exceed -1")
    jobs = [(float(m), float(e)) for m in m_list for e in eps_grid]
    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        values = list(pool.map(lambda job: m_infinity(job[0], job[1], n_phi), jobs))
    return [(m, e, v) for (m, e), v in zip(jobs, values)]


def write_sweep_csv(rows, path) -> None:
    write_csv(path, ("m", "epsilon", "m_infinity"), rows)
