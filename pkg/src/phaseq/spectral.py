"""FFT building blocks shared by the grid operators.

All grids are periodic and even-sized, with the coordinate origin sitting on
the grid point with index n//2.  Transforms that pair such centered axes need
the centered DFT

    C[x](m) = sum_j exp(-2*pi*i*(m - n/2)*(j - n/2)/n) x_j

which reduces to an ordinary FFT conjugated by (-1)^j sign flips plus a
constant phase.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "angular_freqs",
    "centered_fft",
    "centered_ifft",
    "spectral_derivative",
    "spectral_shift",
]


def angular_freqs(n: int, dx: float) -> np.ndarray:
    """Angular frequencies k (fft ordering) for an n-point grid of spacing dx."""
    return 2.0 * np.pi * np.fft.fftfreq(n, dx)


def _signs(n: int, ndim: int, axis: int) -> np.ndarray:
    s = (-1.0) ** np.arange(n)
    shape = [1] * ndim
    shape[axis] = n
    return s.reshape(shape)


def centered_fft(a: np.ndarray, axis: int) -> np.ndarray:
    n = a.shape[axis]
    s = _signs(n, a.ndim, axis)
    # exp(-i*pi*n/2) for even n is (-1)**(n//2)
    phase = (-1.0) ** (n // 2)
    return phase * s * np.fft.fft(s * a, axis=axis)


def centered_ifft(a: np.ndarray, axis: int) -> np.ndarray:
    """Centered DFT with the opposite exponent sign (includes the factor n)."""
    n = a.shape[axis]
    s = _signs(n, a.ndim, axis)
    phase = (-1.0) ** (n // 2)
    return phase * s * n * np.fft.ifft(s * a, axis=axis)


def spectral_derivative(a: np.ndarray, dx: float, axis: int, order: int = 1) -> np.ndarray:
    """Differentiate a periodic sampled field along one axis.

    The Nyquist mode is dropped for odd orders, which keeps the operator
    exactly anti-Hermitian and keeps derivatives of real fields real.
    """
    n = a.shape[axis]
    k = angular_freqs(n, dx)
    if order % 2 == 1:
        k = k.copy()
        k[n // 2] = 0.0
    mult = (1j * k) ** order
    shape = [1] * a.ndim
    shape[axis] = n
    spec = np.fft.fft(a, axis=axis)
    return np.fft.ifft(mult.reshape(shape) * spec, axis=axis)


def spectral_shift(a: np.ndarray, shift, dx: float, axis: int) -> np.ndarray:
    """Translate a periodic field: out(x) = a(x - shift) along `axis`.

    `shift` is a scalar or an array broadcastable against `a` with length 1
    on `axis` (a coordinate-dependent shift turns this into a shear).
    """
    n = a.shape[axis]
    shape = [1] * a.ndim
    shape[axis] = n
    k = angular_freqs(n, dx).reshape(shape)
    mult = np.exp(-1j * k * np.asarray(shift))
    return np.fft.ifft(mult * np.fft.fft(a, axis=axis), axis=axis)
