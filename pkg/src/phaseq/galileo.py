"""Symplectic involutions K_S(alpha, xi), pre-quantum Galileo generators and
discrete symmetries on phase-space fields.

K_S(alpha) has kernel (alpha/h)^d exp[(i alpha/hbar)(q.p1 - p.q1)] and the
gauge transform U_G(xi) multiplies by exp[-(i xi/hbar) p.q];
K_S(alpha, xi) = U_G(xi)^dag K_S(alpha) U_G(xi), with the fundamental choice
alpha = xi = 1/2.

On a grid with n_p == n_q == n per axis and alpha*dp*dq*n = 2*pi*hbar, the
kernel integral collapses to a pair of centered FFTs with axis exchange and
unit prefactor, making the discrete transform an exact involution and exactly
self-adjoint.  Other grids are rejected rather than approximated.
"""
from __future__ import annotations

import numpy as np

from .phase_grid import LinearOperator, PhaseField, PhaseGrid
from .spectral import centered_fft, centered_ifft, spectral_shift

__all__ = [
    "SymplecticTransform",
    "fundamental_symplectic",
    "PrequantumGenerator",
    "prequantum_apply",
    "translate",
    "boost",
    "rotate_z",
    "parity",
    "time_reversal",
]


def _check_compatible(grid: PhaseGrid, alpha: float):
    if grid.n_p != grid.n_q:
        raise ValueError("symplectic transform needs n_p == n_q")
    if not grid.is_symmetric():
        raise ValueError("symplectic transform needs origin-centered extents")
    h = 2.0 * np.pi * grid.hbar
    for i in range(grid.dim):
        ratio = alpha * grid.dp[i] * grid.dq[i] * grid.n_p / h
        if abs(ratio - 1.0) > 1e-9:
            raise ValueError(
                f"grid incompatible with K_S(alpha={alpha}): axis {i} has "
                f"alpha*dp*dq*n/h = {ratio!r}, need 1 "
                "(see phase_grid.symplectic_compatible_grid)"
            )


class SymplecticTransform(LinearOperator):
    """Unitary self-adjoint involution K_S(alpha, xi) on a compatible grid."""

    def __init__(self, grid: PhaseGrid, alpha: float = 0.5, xi: float = 0.5):
        _check_compatible(grid, alpha)
        self.grid = grid
        self.alpha = float(alpha)
        self.xi = float(xi)
        ps, qs = grid.coords()
        pq = sum(p * q for p, q in zip(ps, qs))
        self._gauge = np.exp(-1j * self.xi / grid.hbar * pq)

    def _core(self, values: np.ndarray) -> np.ndarray:
        """K_S(alpha) alone: centered FFT pair with p/q axis exchange."""
        d = self.grid.dim
        n = self.grid.n_p
        out = values
        for i in range(d):
            out = centered_fft(out, axis=d + i)   # q_i axis -> output p_i index
            out = centered_ifft(out, axis=i)      # p_i axis -> output q_i index
        # move transformed q-axes (holding new p indices) to the front
        perm = list(range(d, 2 * d)) + list(range(d))
        return out.transpose(perm) / float(n) ** d

    def apply(self, phi: PhaseField) -> PhaseField:
        if phi.grid != self.grid:
            raise ValueError("grid mismatch")
        g = self._gauge * phi.values
        g = self._core(g)
        return PhaseField(self.grid, np.conj(self._gauge) * g, phi.role)

    def adjoint(self):
        return self


def fundamental_symplectic(grid: PhaseGrid) -> SymplecticTransform:
    """The paper's distinguished involution K_S = K_S(1/2, 1/2)."""
    return SymplecticTransform(grid, alpha=0.5, xi=0.5)


_EPS3 = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}


class PrequantumGenerator(LinearOperator):
    """K_S-invariant Galileo generators on phase-space fields.

    kind "P": -i hbar grad_q           (translations)
    kind "Q": q + i hbar grad_p        (boosts, with the gauge phase)
    kind "J": -i hbar (q ^ grad_q + p ^ grad_p)   (rotations)
    kind "L": (Q* ^ P*)                (orbital part)
    kind "S": J* - L*                  (internal part)

    For dim = 2 the only wedge component is z (component index ignored);
    for dim = 3 `component` selects x, y or z.
    """

    def __init__(self, grid: PhaseGrid, kind: str, component: int = 2):
        kind = kind.upper().rstrip("*")
        if kind not in ("P", "Q", "J", "L", "S"):
            raise ValueError(f"unknown generator kind {kind!r}")
        if kind in ("J", "L", "S") and grid.dim < 2:
            raise ValueError(f"{kind}* needs dim >= 2")
        if kind in ("P", "Q") and not 0 <= component < grid.dim:
            raise ValueError("component out of range")
        if kind in ("J", "L", "S") and grid.dim == 2:
            component = 2
        self.grid = grid
        self.kind = kind
        self.component = component

    def _wedge_pairs(self):
        """(j, k, sign) terms of the `component` of a 3-vector wedge."""
        if self.grid.dim == 2:
            return [(0, 1, 1.0), (1, 0, -1.0)]
        return [
            (j, k, float(s))
            for (i, j, k), s in _EPS3.items()
            if i == self.component
        ]

    def apply(self, phi: PhaseField) -> PhaseField:
        if phi.grid != self.grid:
            raise ValueError("grid mismatch")
        g = self.grid
        hbar = g.hbar
        v = phi.values
        if self.kind == "P":
            out = -1j * hbar * g.d_dq(v, self.component)
        elif self.kind == "Q":
            out = g.q_broadcast(self.component) * v + 1j * hbar * g.d_dp(v, self.component)
        elif self.kind == "J":
            acc = np.zeros(g.shape, dtype=complex)
            for j, k, s in self._wedge_pairs():
                acc += s * g.q_broadcast(j) * g.d_dq(v, k)
                acc += s * g.p_broadcast(j) * g.d_dp(v, k)
            out = -1j * hbar * acc
        elif self.kind == "L":
            acc = np.zeros(g.shape, dtype=complex)
            for j, k, s in self._wedge_pairs():
                qj = PrequantumGenerator(g, "Q", j)
                pk = PrequantumGenerator(g, "P", k)
                acc += s * qj.apply(pk.apply(phi)).values
            out = acc
        else:  # S = J - L
            j = PrequantumGenerator(g, "J", self.component).apply(phi).values
            l = PrequantumGenerator(g, "L", self.component).apply(phi).values
            out = j - l
        return PhaseField(g, out, phi.role)

    def adjoint(self):
        return self


def prequantum_apply(generator: PrequantumGenerator, phi: PhaseField) -> PhaseField:
    return generator.apply(phi)


# -- group actions ---------------------------------------------------------

def translate(phi: PhaseField, q0) -> PhaseField:
    """phi(p, q) -> phi(p, q - q0)."""
    g = phi.grid
    q0 = np.atleast_1d(np.asarray(q0, dtype=float))
    v = phi.values
    for i in range(g.dim):
        if q0[i]:
            v = spectral_shift(v, q0[i], g.dq[i], axis=g.dim + i)
    return PhaseField(g, v, phi.role)


def boost(phi: PhaseField, p0) -> PhaseField:
    """phi -> exp[(i/hbar) p0.q] phi(p - p0, q)."""
    g = phi.grid
    p0 = np.atleast_1d(np.asarray(p0, dtype=float))
    v = phi.values
    for i in range(g.dim):
        if p0[i]:
            v = spectral_shift(v, p0[i], g.dp[i], axis=i)
    _, qs = g.coords()
    phase = np.exp(1j / g.hbar * sum(p0[i] * qs[i] for i in range(g.dim)))
    return PhaseField(g, phase * v, phi.role)


def _shear(values, axis, coord_axis, coord_vals, slope, dx):
    """values(x_axis) -> values(x_axis - slope * x_coord): one shear pass."""
    shape = [1] * values.ndim
    shape[coord_axis] = len(coord_vals)
    shift = slope * coord_vals.reshape(shape)
    return spectral_shift(values, shift, dx, axis=axis)


def _rotate_plane(values, grid, ax_i, ax_j, coords_i, coords_j, d_i, d_j, theta):
    """Rotate one 2-plane by theta with the three-shear decomposition."""
    # reduce to |theta| <= pi/4 with exact quarter turns
    quarter = int(np.round(theta / (np.pi / 2)))
    theta = theta - quarter * (np.pi / 2)
    for _ in range(quarter % 4):
        # (x_i, x_j) -> (-x_j, x_i): index permutation for centered even grids
        values = np.moveaxis(values, (ax_i, ax_j), (ax_j, ax_i))
        values = np.flip(values, axis=ax_i)
        values = np.roll(values, 1, axis=ax_i)
    if abs(theta) > 1e-15:
        a = -np.tan(theta / 2.0)
        b = np.sin(theta)
        values = _shear(values, ax_i, ax_j, coords_j, a, d_i)
        values = _shear(values, ax_j, ax_i, coords_i, b, d_j)
        values = _shear(values, ax_i, ax_j, coords_j, a, d_i)
    return values


def rotate_z(phi: PhaseField, theta: float) -> PhaseField:
    """Simultaneous rotation of (p1, p2) and (q1, q2) by angle theta.

    Spectral three-shear resampling; exact for quarter turns.  dim >= 2 only,
    and the two rotated axes must share spacing and extents.
    """
    g = phi.grid
    if g.dim < 2:
        raise ValueError("rotation needs dim >= 2")
    for pair in (g.p_extent[:2], g.q_extent[:2]):
        if not np.allclose(pair[0], pair[1]):
            raise ValueError("rotation needs matching extents on the rotated axes")
    if not g.is_symmetric():
        raise ValueError("rotation needs origin-centered extents")
    v = phi.values
    v = _rotate_plane(v, g, 0, 1, g.p_axis(0), g.p_axis(1), g.dp[0], g.dp[1], theta)
    v = _rotate_plane(
        v, g, g.dim, g.dim + 1, g.q_axis(0), g.q_axis(1), g.dq[0], g.dq[1], theta
    )
    return PhaseField(g, v, phi.role)


def _negate_axis(values, axis):
    """Index map j -> (n - j) mod n: coordinate negation on a centered grid."""
    return np.roll(np.flip(values, axis=axis), 1, axis=axis)


def parity(phi: PhaseField) -> PhaseField:
    """K_P: phi(p, q) -> phi(-p, -q)."""
    if not phi.grid.is_symmetric():
        raise ValueError("parity needs origin-centered extents")
    v = phi.values
    for ax in range(2 * phi.grid.dim):
        v = _negate_axis(v, ax)
    return PhaseField(phi.grid, v, phi.role)


def time_reversal(phi: PhaseField) -> PhaseField:
    """K_T (antilinear): phi(p, q) -> conj(phi)(-p, q)."""
    if not phi.grid.is_symmetric():
        raise ValueError("time reversal needs origin-centered extents")
    v = np.conj(phi.values)
    for ax in range(phi.grid.dim):
        v = _negate_axis(v, ax)
    return PhaseField(phi.grid, v, phi.role)
