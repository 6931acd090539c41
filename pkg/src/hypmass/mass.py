"""Quasi-local and asymptotic mass functionals.

* ``mass_m`` is the mass of the coordinate circle ``S_r`` in the flow
  metric ``g^u`` measured against the hyperbolic plane; it is
  non-increasing in r along any solution.
* ``byst_mass_dphi`` / ``byst_mass_ds`` are the two weightings of the
  Brown-York-Shi-Tam mass of a closed curve.  They agree on round circles
  but not on general curves.
* ``h0_from_flow`` is the Hamiltonian mass read off the tail of a flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .flow import FlowSolution, TailFit, v_infinity
from .geometry import (Metric2D, ParametricCurve, curve_length_element,
                       gauss_curvature, geodesic_curvature)
from .grid import TWO_PI, as_values, phi_grid
from .io import write_csv


def _positive(u) -> np.ndarray:
    u = as_values(u)
    if np.any(~(u > 0)):
        raise InputError("u must be positive")
    return u


def mass_m(r: float, u) -> float:
    """``(1/pi) * integral of r (k1 - k_u) sqrt(1+r^2) dphi``.

    With ``k1 = sqrt(1+r^2)/r`` and ``k_u = k1/u`` the integrand reduces to
    ``(1+r^2)(1 - 1/u)``, which is what is evaluated.
    """
    u = _positive(u)
    # (u - 1)/u is exact in the subtraction for u near 1, unlike 1 - 1/u
    return float(2.0 * (1.0 + r * r) * np.mean((u - 1.0) / u))


def dmdr_formula(r: float, u) -> float:
    """``-(r/pi) * integral of (u + 1/u - 2) dphi``; never positive."""
    u = _positive(u)
    # u + 1/u - 2 == (u - 1)^2 / u, without the cancellation
    return float(-2.0 * r * np.mean((u - 1.0) ** 2 / u))


def byst_from_curvature(k, r0: float) -> float:
    """BYST mass (dphi weighting) of a curve of length ``2 pi r0`` whose
    geodesic curvature, sampled on the uniform phi grid, is ``k``."""
    k = as_values(k)
    s = np.sqrt(1.0 + r0 * r0)
    return float(2.0 * np.mean((s / r0 - k) * r0 * s))


def _reference_data(metric: Metric2D, curve: ParametricCurve, n: int, dtype):
    phi = phi_grid(n).astype(dtype)
    dl = curve_length_element(metric, curve, phi)
    k = geodesic_curvature(metric, curve, phi)
    r0 = np.mean(dl)  # L / 2pi
    k_hat = np.sqrt(1.0 + r0 * r0) / r0
    return k, dl, r0, k_hat


def byst_mass_dphi(metric: Metric2D, curve: ParametricCurve, n: int = 256,
                   dtype=np.float64) -> float:
    """``(1/pi) * integral of (k_hat - k) r0 sqrt(1+r0^2) dphi`` with ``r0 = L/2pi``.

    ``dtype=np.longdouble`` evaluates the geometry in extended precision.
    """
    k, _, r0, k_hat = _reference_data(metric, curve, n, dtype)
    return float(2.0 * np.mean((k_hat - k) * r0 * np.sqrt(1.0 + r0 * r0)))


def byst_mass_ds(metric: Metric2D, curve: ParametricCurve, n: int = 256,
                 dtype=np.float64) -> float:
    """``(1/pi) * integral of (k_hat - k) sqrt(1+r0^2) ds``."""
    k, dl, r0, k_hat = _reference_data(metric, curve, n, dtype)
    return float(2.0 * np.mean((k_hat - k) * dl * np.sqrt(1.0 + r0 * r0)))


def h0_from_flow(solution: FlowSolution | TailFit) -> float:
    """``(1/pi) * integral of v_inf dphi``."""
    tail = solution if isinstance(solution, TailFit) else v_infinity(solution)
    return 2.0 * tail.v_inf.mean()


@dataclass(frozen=True)
class MassReport:
    """Mass along a flow.

    ``dmdr_numeric`` at record ``i`` is the three-point difference of ``m``
    over records ``i-1, i, i+1`` (NaN at the two ends).
    """

    radii: np.ndarray
    m: np.ndarray
    dmdr_formula: np.ndarray
    dmdr_numeric: np.ndarray
    h0_estimate: float
    byst: float
    tol: float

    @property
    def monotonicity_violations(self) -> int:
        return int(np.sum(np.diff(self.m) > 10.0 * self.tol))

    def rows(self):
        return zip(self.radii, self.m, self.dmdr_formula, self.dmdr_numeric)

    def to_csv(self, path) -> None:
        write_csv(path, ("r", "m", "dmdr_formula", "dmdr_numeric"), self.rows())

    def summary(self) -> str:
        return (f"byst={self.byst!r}\n"
                f"h0_estimate={self.h0_estimate!r}\n"
                f"monotonicity_violations={self.monotonicity_violations}")


def three_point_derivative(x, f) -> np.ndarray:
    """Second-order derivative of ``f`` at the interior nodes of a possibly
    non-uniform grid ``x``; the centered difference when spacing is even."""
    x, f = np.asarray(x, float), np.asarray(f, float)
    hl, hr = x[1:-1] - x[:-2], x[2:] - x[1:-1]
    return (hl * hl * f[2:] - hr * hr * f[:-2] + (hr * hr - hl * hl) * f[1:-1]) / (hl * hr * (hl + hr))


def mass_report(solution: FlowSolution, h0: float | None = None) -> MassReport:
    radii = solution.radii
    m = np.array([mass_m(r, u) for r, u in zip(radii, solution.u)])
    formula = np.array([dmdr_formula(r, u) for r, u in zip(radii, solution.u)])
    numeric = np.full(radii.size, np.nan)
    numeric[1:-1] = three_point_derivative(radii, m)
    if h0 is None:
        h0 = h0_from_flow(solution)
    return MassReport(radii, m, formula, numeric, float(h0), float(m[0]), solution.config.tol)


@dataclass(frozen=True)
class Theorem1Report:
    """Outcome of comparing ``integral of k ds`` with ``2 pi sqrt(1 + r0^2)``."""

    total_curvature: float
    bound: float
    r0: float
    min_gauss_curvature: float
    curvature_bounded_below: bool
    boundary_convex: bool
    jordan_domain: bool
    inequality_holds: bool
    equality: bool

    @property
    def applicable(self) -> bool:
        return self.curvature_bounded_below and self.boundary_convex and self.jordan_domain

    @property
    def byst(self) -> float:
        return (self.bound - self.total_curvature) * np.sqrt(1 + self.r0**2) / np.pi


def theorem1_check(metric: Metric2D, curve: ParametricCurve, n_r: int = 64,
                   n_phi: int = 256) -> Theorem1Report:
    """Check the total-curvature bound for the region ``r <= r(phi)``.

    The hypotheses are reported, not enforced.  The region counts as a
    Jordan domain only when the metric closes smoothly at the origin;
    otherwise (horizons, trumpets, cone points) the check is flagged
    inapplicable.  Gauss curvature is sampled on an ``n_r x n_phi`` polar
    grid strictly inside the region.
    """
    phi = phi_grid(n_phi)
    k = geodesic_curvature(metric, curve, phi)
    dl = curve_length_element(metric, curve, phi)
    total = float(TWO_PI * np.mean(k * dl))
    r0 = float(np.mean(dl))
    bound = float(TWO_PI * np.sqrt(1.0 + r0 * r0))

    r_edge = np.broadcast_to(curve.r(phi), phi.shape)
    frac = (np.arange(n_r) + 0.5) / n_r
    R = metric.r_min + np.multiply.outer(frac, r_edge - metric.r_min)
    P = np.broadcast_to(phi, R.shape)
    ok = np.asarray(metric.domain(R))
    kg = gauss_curvature(metric, R[ok], P[ok]) if ok.any() else np.array([np.nan])
    kmin = float(np.min(kg))

    return Theorem1Report(
        total_curvature=total,
        bound=bound,
        r0=r0,
        min_gauss_curvature=kmin,
        curvature_bounded_below=bool(kmin >= -1.0 - 1e-9),
        boundary_convex=bool(np.all(k > 0)),
        jordan_domain=bool(metric.regular_origin),
        inequality_holds=bool(total <= bound * (1 + 1e-12)),
        equality=bool(abs(bound - total) <= 1e-9 * bound),
    )
