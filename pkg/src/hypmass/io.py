"""CSV readers and writers.

Numbers are written in the shortest decimal form that round-trips
(``repr`` of a Python float), so identical runs give identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import InputError
from .grid import TWO_PI, PeriodicGridFunction


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header, rows) -> None:
    """Write ``header`` then ``rows`` to a path or an open text stream."""
    if hasattr(path, "write"):
        _write_rows(path, header, rows)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(fh, header, rows)


def _write_rows(fh, header, rows) -> None:
    out = csv.writer(fh, lineterminator="\n")
    out.writerow(header)
    for row in rows:
        out.writerow([fmt(x) for x in row])


def read_numeric_csv(path, ncols: int) -> np.ndarray:
    """Rows of ``ncols`` floats; a leading non-numeric header row is skipped."""
    try:
        with open(path, newline="") as fh:
            raw = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not raw:
        raise InputError(f"{path}: empty file")
    try:
        [float(c) for c in raw[0]]
    except ValueError:
        raw = raw[1:]
    try:
        data = np.array([[float(c) for c in row] for row in raw], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != ncols:
        raise InputError(f"{path}: expected {ncols} columns per row")
    if not np.all(np.isfinite(data)):
        raise InputError(f"{path}: non-finite entry")
    return data


def _check_uniform(phi: np.ndarray, path) -> None:
    n = phi.size
    if n < 2 or not np.allclose(phi, TWO_PI * np.arange(n) / n, rtol=0, atol=1e-9 * TWO_PI):
        raise InputError(f"{path}: phi column must be the uniform grid 2*pi*j/n, j = 0..n-1")


def load_periodic_csv(path) -> PeriodicGridFunction:
    """``(phi, value)`` rows on a uniform grid."""
    data = read_numeric_csv(path, 2)
    _check_uniform(data[:, 0], path)
    return PeriodicGridFunction(data[:, 1])


def load_mass_aspect_csv(path):
    """``(phi, mu11, mu12, mu22)`` rows on a uniform grid."""
    from .spaces import MassAspect

    data = read_numeric_csv(path, 4)
    _check_uniform(data[:, 0], path)
    return MassAspect(*(PeriodicGridFunction(data[:, j]) for j in (1, 2, 3)))


def write_solution_csv(solution, path) -> None:
    """``r, phi, u, v`` rows for every recorded radius."""
    phi = TWO_PI * np.arange(solution.n_phi) / solution.n_phi
    v = solution.v

    def rows():
        for i, r in enumerate(solution.radii):
            for j in range(solution.n_phi):
                yield r, phi[j], solution.u[i, j], v[i, j]

    write_csv(path, ("r", "phi", "u", "v"), rows())


def read_solution_csv(path):
    """Inverse of :func:`write_solution_csv`; returns ``(radii, u)``."""
    data = read_numeric_csv(path, 4)
    radii, first = np.unique(data[:, 0], return_index=True)
    order = np.argsort(first)
    radii = radii[order]
    n_phi = data.shape[0] // radii.size
    if n_phi * radii.size != data.shape[0]:
        raise InputError(f"{Path(path)}: ragged solution table")
    u = data[:, 2].reshape(radii.size, n_phi)
    _check_uniform(data[:n_phi, 1], path)
    if np.any(np.diff(radii) <= 0):
        raise InputError(f"{path}: radii must increase")
    return radii, u
