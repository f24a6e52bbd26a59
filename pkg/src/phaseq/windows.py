"""Window fields defining irreducible subspaces.

Three families:

* ``hermite1d(n)``   -- 1D Hermite function of width lambda,
* ``planar2d(m)``    -- 2D Laguerre-Gaussian ground mode with winding m
                        (the planar stand-in for the magnetic index),
* ``radial3d(S)``    -- radial profile Psi0 against the measure u^2 du,
                        handled by quadrature only (never on a 3D grid).

All windows carry the reduced normalization h^dim * int |Phi|^2 = 1; the 3D
profile obeys int_0^inf u^2 Psi0(u)^2 du = 1.  Radial profiles must be real
(otherwise time reversal does not close on the subspace).

Angular phases of the planar family follow the Condon-Shortley-style rule
conj(Phi_m) = (-1)^m Phi_{-m}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermval
from numpy.polynomial.legendre import leggauss

__all__ = [
    "Window",
    "build_window",
    "radial_rule",
    "radial_norm",
    "chi_squared",
    "eta_squared",
]

_FAMILIES = ("hermite1d", "planar2d", "radial3d")


def _hermite_fn(n: int, s: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite function psi_n on the line."""
    coeffs = [0.0] * n + [1.0]
    norm = math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))
    return hermval(s, coeffs) * np.exp(-0.5 * s * s) / norm


def _hermite_fn_deriv(n: int, s: np.ndarray) -> np.ndarray:
    """d/ds of psi_n, via H_n' = 2 n H_{n-1}."""
    coeffs = [0.0] * n + [1.0]
    norm = math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))
    h = hermval(s, coeffs)
    hprime = 2.0 * n * hermval(s, [0.0] * (n - 1) + [1.0]) if n > 0 else 0.0
    return (hprime - s * h) * np.exp(-0.5 * s * s) / norm


@dataclass(frozen=True)
class Window:
    """One irreducible-subspace window with its length scale.

    `index` is the Hermite order n (1D), the winding m (2D) or the spin S
    (3D); `m_s` labels the magnetic component of a radial3d window.
    """

    family: str
    index: int
    lam: float
    hbar: float = 1.0
    m_s: int = 0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown window family {self.family!r}")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.family == "hermite1d" and self.index < 0:
            raise ValueError("hermite index must be >= 0")
        if self.family == "radial3d":
            if self.index < 0:
                raise ValueError("spin S must be >= 0")
            if abs(self.m_s) > self.index:
                raise ValueError("m_s out of range -S..S")
        elif self.m_s:
            raise ValueError("m_s only labels radial3d windows")

    @property
    def dim(self) -> int:
        return {"hermite1d": 1, "planar2d": 2, "radial3d": 3}[self.family]

    @property
    def h(self) -> float:
        return 2.0 * math.pi * self.hbar

    # -- evaluation ---------------------------------------------------------
    def __call__(self, *offsets):
        """Window value at position offsets (continuum normalization)."""
        if self.family == "hermite1d":
            (u,) = offsets
            return _hermite_fn(self.index, np.asarray(u) / self.lam) / math.sqrt(
                self.h * self.lam
            )
        if self.family == "planar2d":
            x1, x2 = (np.asarray(o) for o in offsets)
            m = self.index
            am = abs(m)
            w = (x1 + 1j * np.sign(m) * x2) / self.lam if m else np.ones(np.broadcast(x1, x2).shape)
            cs = (-1.0) ** m if m > 0 else 1.0
            norm = math.sqrt(self.h**2 * math.pi * self.lam**2 * math.factorial(am))
            return cs * w**am * np.exp(-(x1**2 + x2**2) / (2 * self.lam**2)) / norm
        raise ValueError("radial3d windows are quadrature-only; use radial_profile")

    def gradient(self, *offsets):
        """Analytic spatial gradient (hermite1d only; others differentiate
        spectrally on their grids)."""
        if self.family != "hermite1d":
            raise ValueError("analytic gradient only available for hermite1d")
        (u,) = offsets
        s = np.asarray(u) / self.lam
        return (_hermite_fn_deriv(self.index, s) / (self.lam * math.sqrt(self.h * self.lam)),)

    # -- 3D radial profile ----------------------------------------------------
    def radial_profile(self, u):
        """Dimensionless Gaussian profile Psi0 with int u^2 Psi0^2 du = 1."""
        if self.family != "radial3d":
            raise ValueError("radial profile is a radial3d notion")
        n2 = 4.0 / math.sqrt(math.pi)
        return math.sqrt(n2) * np.exp(-0.5 * np.asarray(u) ** 2)

    def radial_profile_deriv(self, u):
        if self.family != "radial3d":
            raise ValueError("radial profile is a radial3d notion")
        u = np.asarray(u)
        return -u * self.radial_profile(u)

    # -- discrete symmetry constants -----------------------------------------
    @property
    def parity_sign(self) -> int:
        """Eigenvalue of the window under x -> -x."""
        return -1 if self.index % 2 else 1

    @property
    def ks_sign(self) -> int:
        """Intrinsic-parity eigenvalue of the fundamental symplectic transform."""
        return self.parity_sign

    def time_reversal_partner(self):
        """(partner window, sign): K_T sends this window to sign * partner."""
        if self.family == "hermite1d":
            return self, 1
        if self.family == "planar2d":
            sign = -1 if self.index % 2 else 1
            return Window(self.family, -self.index, self.lam, self.hbar), sign
        sign = -1 if self.m_s % 2 else 1
        return Window(self.family, self.index, self.lam, self.hbar, -self.m_s), sign


def build_window(family: str, index: int, lam: float, hbar: float = 1.0, m_s: int = 0) -> Window:
    return Window(family, int(index), float(lam), float(hbar), int(m_s))


# -- radial quadrature (3D) -----------------------------------------------------

def radial_rule(span: float = 12.0, n: int = 240):
    """Gauss-Legendre nodes/weights on [0, span] in units of lambda."""
    x, w = leggauss(n)
    return 0.5 * span * (x + 1.0), 0.5 * span * w


def radial_norm(window: Window, span: float = 12.0, n: int = 240) -> float:
    """int_0^inf u^2 Psi0^2 du (should be 1)."""
    u, w = radial_rule(span, n)
    f = window.radial_profile(u)
    return float(np.sum(w * u**2 * f**2))


def chi_squared(window: Window, span: float = 12.0, n: int = 240) -> float:
    """Free-energy coefficient: int [( (u Psi0)' )^2 + S(S+1) Psi0^2] du."""
    if window.family != "radial3d":
        raise ValueError("chi^2 is defined for radial3d windows")
    u, w = radial_rule(span, n)
    f = window.radial_profile(u)
    df = window.radial_profile_deriv(u)
    s = window.index
    integrand = (f + u * df) ** 2 + s * (s + 1) * f**2
    return float(np.sum(w * integrand))


def eta_squared(window: Window, span: float = 12.0, n: int = 240) -> float:
    """Harmonic-offset coefficient: int u^4 Psi0^2 du."""
    if window.family != "radial3d":
        raise ValueError("eta^2 is defined for radial3d windows")
    u, w = radial_rule(span, n)
    f = window.radial_profile(u)
    return float(np.sum(w * u**4 * f**2))
