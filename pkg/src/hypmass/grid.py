"""Uniform periodic grids on [0, 2*pi) and spectral operations on them."""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def phi_grid(n: int) -> np.ndarray:
    """Uniform grid ``2*pi*j/n``, ``j = 0..n-1``."""
    return TWO_PI * np.arange(n) / n


def wavenumbers(n: int) -> np.ndarray:
    return np.fft.rfftfreq(n, d=1.0 / n)


def spectral_derivative(values: np.ndarray, order: int = 1) -> np.ndarray:
    """Derivative of periodic samples along the last axis via the FFT.

    For odd ``order`` the Nyquist coefficient is dropped (its derivative is
    not representable on the grid); even orders keep it, which makes the
    second derivative the exact derivative of the real trigonometric
    interpolant.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    k = wavenumbers(n)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        mult[-1] = 0.0
    return np.fft.irfft(np.fft.rfft(values, axis=-1) * mult, n=n, axis=-1)


def second_derivative_matrix(n: int) -> np.ndarray:
    """Dense spectral second-derivative matrix on the ``n``-point grid."""
    return spectral_derivative(np.eye(n), 2).T


def trig_interpolate(values: np.ndarray, phi, derivative: int = 0) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``values`` (last axis) at ``phi``."""
    values = np.asarray(values, dtype=float)
    phi = np.asarray(phi, dtype=float)
    n = values.shape[-1]
    coef = np.fft.rfft(values, axis=-1) / n
    k = wavenumbers(n)
    weight = np.full(k.shape, 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0
    coef = coef * weight * (1j * k) ** derivative
    if n % 2 == 0 and derivative % 2 == 1:
        coef[..., -1] = 0.0
    # coefficient axis last, evaluation points broadcast in front
    basis = np.exp(1j * np.multiply.outer(phi, k))
    return np.real(np.tensordot(basis, coef, axes=([-1], [-1])))


class PeriodicGridFunction:
    """Samples of a smooth 2*pi-periodic function on a uniform grid.

    Behaves as a read-only numpy array through ``__array__`` so it can be
    fed straight into numpy expressions.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        values = np.array(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("PeriodicGridFunction needs a 1-D array of >= 2 samples")
        values.setflags(write=False)
        self._values = values

    @classmethod
    def from_function(cls, func, n: int) -> "PeriodicGridFunction":
        return cls(np.broadcast_to(func(phi_grid(n)), (n,)))

    @classmethod
    def constant(cls, value: float, n: int) -> "PeriodicGridFunction":
        return cls(np.full(n, float(value)))

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return self._values.size

    @property
    def phi(self) -> np.ndarray:
        return phi_grid(self.n)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._values
        return self._values.astype(dtype)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"PeriodicGridFunction(n={self.n}, min={self.min():.6g}, max={self.max():.6g})"

    def __call__(self, phi, derivative: int = 0) -> np.ndarray:
        return trig_interpolate(self._values, phi, derivative)

    def derivative(self, order: int = 1) -> "PeriodicGridFunction":
        return PeriodicGridFunction(spectral_derivative(self._values, order))

    def mean(self) -> float:
        """``(1/2pi) * integral over [0, 2pi)`` by the periodic trapezoid rule."""
        return float(np.mean(self._values))

    def integral(self) -> float:
        return TWO_PI * self.mean()

    def min(self) -> float:
        return float(self._values.min())

    def max(self) -> float:
        return float(self._values.max())

    def resample(self, n: int) -> "PeriodicGridFunction":
        return PeriodicGridFunction(trig_interpolate(self._values, phi_grid(n)))

    def shift(self, steps: int) -> "PeriodicGridFunction":
        """Values at ``phi + steps * 2pi/n``."""
        return PeriodicGridFunction(np.roll(self._values, -steps))


def as_values(f) -> np.ndarray:
    return np.asarray(f, dtype=float)


def real_array(x) -> np.ndarray:
    """``x`` as a floating array, keeping extended precision when given."""
    a = np.asarray(x)
    return a.astype(np.result_type(a, np.float64), copy=False)
