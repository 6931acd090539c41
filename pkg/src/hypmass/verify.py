"""Invariant suite run by ``hypmass verify``.

Each group returns a list of :class:`Check`; the suite passes iff every
check does.  ``quick`` shrinks grids and ensembles, not tolerances.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from . import btz as btz_mod
from .flow import FlowConfig, explicit_solution, ode_constant, solve, v_infinity
from .geometry import ParametricCurve, geodesic_curvature, scalar_curvature, total_geodesic_curvature, curve_length_element
from .grid import PeriodicGridFunction, phi_grid
from .mass import byst_mass_dphi, dmdr_formula, h0_from_flow, mass_m, mass_report
from .flow import boundary_data_from_curvature
from .spaces import MassAspect, alh_metric, btz, flow_metric, hamiltonian_mass, hyperbolic

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Check:
    group: str
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.group}] {self.name}: {self.detail}"


def random_smooth_data(seed: int, n_phi: int, modes: int = 4) -> np.ndarray:
    """Truncated cosine series rescaled to a random sub-range of [0.5, 2]."""
    rng = np.random.default_rng(seed)
    phi = phi_grid(n_phi)
    k = np.arange(1, modes + 1)
    amp = rng.normal(size=modes) / k**2
    shift = rng.uniform(0, 2 * np.pi, size=modes)
    series = np.sum(amp[:, None] * np.cos(np.outer(k, phi) + shift[:, None]), axis=0)
    lo, hi = np.sort(rng.uniform(0.5, 2.0, size=2))
    if hi - lo < 0.05:
        hi = min(2.0, lo + 0.05)
    span = series.max() - series.min()
    return lo + (hi - lo) * (series - series.min()) / span


def _fmt(x: float) -> str:
    return f"{x:.3g}"


def geometry_checks(quick: bool) -> list[Check]:
    g = "geometry"
    out = []
    rng = np.random.default_rng(0)
    n = 200 if quick else 10_000
    r = rng.uniform(0.05, 50.0, n)
    phi = rng.uniform(0, 2 * np.pi, n)
    diff = np.max(np.abs(hyperbolic().g(r, phi) - btz(-1).g(r, phi)))
    out.append(Check(g, "btz(-1) == hyperbolic", diff <= 1e-15, _fmt(diff)))
    worst = 0.0
    for metric, rr in ((hyperbolic(), r), (btz(1.0), 1.0 + r), (btz(0.0), r), (btz(2.5), 2.0 + r)):
        worst = max(worst, float(np.max(np.abs(scalar_curvature(metric, rr, phi) + 2))))
    out.append(Check(g, "scalar curvature -2", worst <= 1e-8, _fmt(worst)))
    err = 0.0
    for r0 in (0.5, 3.0, 10.0):
        err = max(err, abs(total_geodesic_curvature(hyperbolic(), ParametricCurve.circle(r0))
                           - 2 * np.pi * np.sqrt(1 + r0 * r0)))
        err = max(err, abs(total_geodesic_curvature(btz(1.0), ParametricCurve.circle(r0 + 1))
                           - 2 * np.pi * np.sqrt((r0 + 1) ** 2 - 1)))
    out.append(Check(g, "circle total curvature", err <= 1e-10, _fmt(err)))
    return out


def ellipse_checks(quick: bool) -> list[Check]:
    g = "btz-ellipse"
    out = []
    v = btz_mod.m_infinity(1.0, 1.0)
    out.append(Check(g, "m_inf(1,1) = 2.8848", abs(v - 2.8848) <= 5e-4, repr(v)))
    err = max(abs(btz_mod.m_infinity(m, 0.0) - (m + 1)) for m in (-1.0, 0.0, 1.0, 2.0))
    out.append(Check(g, "m_inf(m,0) = m+1", err <= 1e-9, _fmt(err)))
    eps = 1e-2
    rel = max(abs((btz_mod.m_infinity(m, eps) - (m + 1)) / eps**2 / (3 * (m + 4) / 8) - 1)
              for m in (-1.0, 0.0, 1.0))
    out.append(Check(g, "small-eps mass coefficient", rel <= 0.01, f"rel {_fmt(rel)}"))
    e = 1e-3
    cp, cm, c0 = (btz_mod.ingredients(0.0, x).c for x in (e, -e, 0.0))
    first = (cp - cm) / (2 * e)
    second = (cp - 2 * c0 + cm) / (2 * e * e)
    rel = max(abs(first / 0.5 - 1), abs(second / (-3 / 16) - 1))
    out.append(Check(g, "c expansion (1/2, -3/16)", rel <= 0.01, f"{first:.6f}, {second:.6f}"))

    phis = phi_grid(4 if quick else 16)
    worst = 0.0
    for m in (-1.0, 0.0, 1.0):
        for ep in (0.25, 0.5, 1.0):
            est = btz_mod.k2_oracle_check(m, ep, phis)
            worst = max(worst, float(np.max(np.abs(est - btz_mod.k2_closed_form(m, ep, phis)))))
    out.append(Check(g, "k2 closed form vs Richardson", worst <= 1e-6, _fmt(worst)))

    diffs, radii = [], np.array([1e2, 1e3, 1e4])
    for R in radii:
        diffs.append(abs(btz_mod.byst_at_radius(btz_mod.EllipseSpec(1.0, 0.5, R))
                         - btz_mod.m_infinity(1.0, 0.5)))
    slope = np.polyfit(np.log(radii), np.log(diffs), 1)[0]
    out.append(Check(g, "finite-R BYST -> m_inf at O(R^-2)", slope <= -1.9, f"slope {slope:.3f}"))
    return out


def alh_checks(quick: bool) -> list[Check]:
    g = "alh"
    aspect = MassAspect.from_functions(lambda p: 2 + np.cos(2 * p), np.sin, 1.0)
    metric = alh_metric(aspect)
    phi = phi_grid(256)
    mu11 = aspect.mu11(phi)
    mu22 = aspect.mu22(phi)
    radii = np.geomspace(1e2, 1e4, 5)
    res = []
    for r in radii:
        k = geodesic_curvature(metric, ParametricCurve.circle(r), phi)
        res.append(np.max(np.abs(k - 1 - (1 - 2 * mu11 - mu22) / (2 * r * r))))
    slope = np.polyfit(np.log(radii), np.log(res), 1)[0]
    out = [Check(g, "geodesic curvature expansion", slope <= -2.9, f"slope {slope:.3f}")]
    r = 1e4
    c = ParametricCurve.circle(r)
    dl = curve_length_element(metric, c, phi)
    r0 = dl.mean()
    total = 2 * np.pi * np.mean(geodesic_curvature(metric, c, phi) * dl)
    est = r / np.pi * (2 * np.pi * np.sqrt(1 + r0 * r0) - total)
    h0 = hamiltonian_mass(aspect)
    out.append(Check(g, "total curvature deficit -> H0", abs(est - h0) <= 1e-3 and abs(h0 - 5) < 1e-12,
                     f"{est:.8f} vs {h0:.8f}"))
    return out


def flow_checks(quick: bool) -> list[Check]:
    g = "flow"
    out = []
    n_phi = 32 if quick else 256
    cases = [(0.5, 1.0), (2.0, 3.0)] if quick else [
        (c, r0) for c in (0.5, 0.9, 1.1, 2.0) for r0 in (0.5, 1.0, 3.0)]
    worst_u = worst_v = worst_h = 0.0
    for c, r0 in cases:
        sol = solve(np.full(n_phi, c), FlowConfig(r0=r0, n_phi=n_phi))
        K = ode_constant(c, r0)
        worst_u = max(worst_u, float(np.max(np.abs(sol.u[-1] - explicit_solution(K, sol.radii[-1])))))
        tail = v_infinity(sol)
        worst_v = max(worst_v, float(np.max(np.abs(tail.v_inf.values + K / 2))))
        worst_h = max(worst_h, abs(h0_from_flow(tail) + K))
    out.append(Check(g, "constant data exactness", worst_u <= 1e-6 and worst_v <= 1e-5 and worst_h <= 1e-4,
                     f"u {_fmt(worst_u)}, v_inf {_fmt(worst_v)}, h0 {_fmt(worst_h)}"))

    seeds = range(3) if quick else range(20)
    barrier = mono = ident = 0.0
    curv = 0.0
    for seed in seeds:
        cfg = FlowConfig(r0=1.0, n_phi=n_phi)
        sol = solve(random_smooth_data(seed, n_phi), cfg)
        barrier = max(barrier, sol.max_barrier_violation)
        rep = mass_report(sol)
        mono = max(mono, float(np.max(np.diff(rep.m))))
        sel = np.isfinite(rep.dmdr_numeric) & (np.abs(rep.dmdr_formula) > 1e-8)
        if sel.any():
            ident = max(ident, float(np.max(np.abs(rep.dmdr_numeric[sel] / rep.dmdr_formula[sel] - 1))))
        if seed == 0:
            # u_r from splines through the stored u only, so the check sees solver error
            metric = flow_metric(sol.u, sol.radii)
            phi = phi_grid(n_phi)
            for r in sol.radii[sol.is_checkpoint][1:-1]:
                curv = max(curv, float(np.max(np.abs(scalar_curvature(metric, np.full(n_phi, r), phi) + 2))))
    tol = 1e-8
    out.append(Check(g, "barrier envelope", barrier <= 10 * tol, f"max excursion {_fmt(barrier)}"))
    out.append(Check(g, "mass monotone", mono <= 10 * tol, f"max increase {_fmt(mono)}"))
    out.append(Check(g, "dm/dr identity", ident <= 0.02, f"max rel {_fmt(ident)}"))
    lim = max(1e-4, 50 * tol)
    out.append(Check(g, "R(g^u) = -2", curv <= lim, _fmt(curv)))
    return out


def chain_checks(quick: bool) -> list[Check]:
    g = "chain"
    n_phi = 32 if quick else 256
    # physical boundary: an ellipse in the hyperbolic plane
    spec = btz_mod.EllipseSpec(-1.0, 0.3, 1.5)
    metric, curve = btz(-1.0), btz_mod.ellipse_curve(spec)
    phi = phi_grid(n_phi)
    k = geodesic_curvature(metric, curve, phi)
    r0 = float(np.mean(curve_length_element(metric, curve, phi)))
    byst = byst_mass_dphi(metric, curve, n_phi)
    u0 = boundary_data_from_curvature(k, r0)
    m0 = mass_m(r0, u0)
    sol = solve(u0, FlowConfig(r0=r0, n_phi=n_phi))
    h0 = h0_from_flow(sol)
    same = abs(byst - m0) <= 1e-12 * max(1.0, abs(byst))
    return [Check(g, "BYST = m(r0) >= H0", same and m0 >= h0 - 1e-4,
                  f"byst {byst:.10f}, m(r0) {m0:.10f}, h0 {h0:.10f}")]


GROUPS = (geometry_checks, ellipse_checks, alh_checks, flow_checks, chain_checks)


def run(quick: bool = False, echo=print) -> bool:
    """Run every group, echoing one line per check.  Output carries no
    timings, so repeated runs print identical text."""
    ok = True
    for group in GROUPS:
        t = time.perf_counter()
        checks = group(quick)
        for c in checks:
            echo(c.line())
            ok &= c.passed
        log.debug("%s took %.1fs", group.__name__, time.perf_counter() - t)
    return ok
