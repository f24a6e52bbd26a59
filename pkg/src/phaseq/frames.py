"""Windowed-Fourier analysis/synthesis between position wavefunctions and
phase-space fields, and the derived subspace machinery.

The analysis map is

    (W psi)(p, q) = int Phi(x - q) exp[-(i/hbar) p.(x - q)] psi(x) dx

and W^dag its adjoint; Pi = W W^dag projects onto one irreducible subspace.

Two evaluation paths exist:

* "fft"    -- the phase grid is the natural one (q axes coincide with the
              x grid and p is the hbar-scaled DFT comb).  W is then a strict
              isometry of the discrete inner products (Parseval), with the
              window renormalized on the grid so that h^d sum |Phi|^2 dx^d = 1
              exactly.
* "kernel" -- any centered phase grid; the window is evaluated analytically
              at the exact offsets x - q and the p integrals are dense
              quadratures.  Used for grids tied to the symplectic transform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .phase_grid import PhaseField, PhaseGrid, _as_extents
from .spectral import centered_fft, centered_ifft
from .windows import Window

__all__ = [
    "XGrid",
    "XState",
    "FrameMaps",
    "natural_phase_grid",
    "coherent_state",
    "coherent_norm_squared",
    "quasi_projector_trace",
    "discrete_symmetry_signs",
    "x_parity",
]


@dataclass(frozen=True)
class XGrid:
    """Uniform periodic position grid (1 or 2 dimensions for field work)."""

    dim: int
    extent: tuple
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("gridded x-space supports dim 1 or 2")
        if self.n < 8 or self.n % 2:
            raise ValueError("grid count must be even and >= 8")
        object.__setattr__(self, "extent", _as_extents(self.extent, self.dim))

    @property
    def dx(self):
        return tuple((hi - lo) / self.n for lo, hi in self.extent)

    def axis(self, i=0):
        lo, hi = self.extent[i]
        return lo + np.arange(self.n) * (hi - lo) / self.n

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def cell_volume(self):
        return math.prod(self.dx)

    def broadcast(self, i=0):
        shape = [1] * self.dim
        shape[i] = self.n
        return self.axis(i).reshape(shape)

    def coords(self):
        return tuple(self.broadcast(i) for i in range(self.dim))

    def is_symmetric(self, tol=1e-12):
        return all(abs(lo + hi) <= tol * max(1.0, abs(hi)) for lo, hi in self.extent)


@dataclass
class XState:
    """Position-representation wavefunction on an XGrid."""

    xgrid: XGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.xgrid.shape:
            raise ValueError("state shape does not match grid")

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2).real * self.xgrid.cell_volume)

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def inner(self, other: "XState") -> complex:
        return complex(np.vdot(self.values, other.values) * self.xgrid.cell_volume)

    def normalized(self) -> "XState":
        return XState(self.xgrid, self.values / self.norm())


def natural_phase_grid(xgrid: XGrid, hbar: float = 1.0) -> PhaseGrid:
    """Phase grid whose q axes equal the x grid and whose p axes are the
    hbar-scaled DFT comb (dp = h / L per axis)."""
    h = 2.0 * math.pi * hbar
    p_ext = []
    for lo, hi in xgrid.extent:
        dp = h / (hi - lo)
        half = xgrid.n * dp / 2.0
        p_ext.append((-half, half))
    return PhaseGrid(xgrid.dim, tuple(p_ext), xgrid.extent, xgrid.n, xgrid.n, hbar)


def _roll_index(n: int) -> np.ndarray:
    """idx[k, j] = (k + j - n/2) mod n: x index of position x_k + u_j."""
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return (k + j - n // 2) % n


def _gather_index(n: int) -> np.ndarray:
    """idx[i, j] = (i - j + n/2) mod n: q index with x_i = x_k + u_j."""
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return (i - j + n // 2) % n


class FrameMaps:
    """Analysis/synthesis pair for one window on chosen grids."""

    def __init__(self, window: Window, xgrid: XGrid, phase_grid: PhaseGrid | None = None):
        if window.dim != xgrid.dim:
            raise ValueError("window/grid dimension mismatch")
        if not xgrid.is_symmetric():
            raise ValueError("x grid must be origin-centered")
        self.window = window
        self.xgrid = xgrid
        self.hbar = window.hbar
        self.h = 2.0 * math.pi * self.hbar
        if phase_grid is None:
            phase_grid = natural_phase_grid(xgrid, self.hbar)
        if phase_grid.hbar != self.hbar:
            raise ValueError("phase grid and window disagree on hbar")
        self.grid = phase_grid
        self.path = "fft" if self._is_natural() else "kernel"

        # sampled window on centered offsets (the x grid doubles as u grid)
        offs = xgrid.coords()
        w = np.asarray(window(*offs))
        w = np.broadcast_to(w, xgrid.shape).astype(complex)
        mass = np.sum(np.abs(w) ** 2) * xgrid.cell_volume * self.h**xgrid.dim
        if mass <= 0:
            raise ValueError("window vanished on the grid")
        self._wsamp = w / math.sqrt(mass)  # exact discrete reduced norm
        self._check_truncation()
        if self.path == "kernel":
            self._kernels = self._build_kernels()

    # -- construction helpers -------------------------------------------------
    def _is_natural(self) -> bool:
        g, xg = self.grid, self.xgrid
        if g.dim != xg.dim or g.n_q != xg.n or g.n_p != xg.n:
            return False
        if g.q_extent != xg.extent:
            return False
        for i in range(g.dim):
            lo, hi = xg.extent[i]
            dp_nat = self.h / (hi - lo)
            if abs(g.dp[i] - dp_nat) > 1e-12 * dp_nat:
                return False
            if abs(g.p_extent[i][0] + xg.n * dp_nat / 2.0) > 1e-9:
                return False
        return True

    def _check_truncation(self, tol: float = 1e-10):
        """Reject windows whose mass spills past the outer tenth of the box."""
        xg = self.xgrid
        dens = np.abs(self._wsamp) ** 2 * self.h**xg.dim * xg.cell_volume
        mask = np.zeros(xg.shape, dtype=bool)
        for i in range(xg.dim):
            lo, hi = xg.extent[i]
            edge = 0.45 * (hi - lo)
            ax = np.abs(xg.broadcast(i))
            mask |= np.broadcast_to(ax > edge, xg.shape)
        spill = float(np.sum(dens[mask]))
        if spill > tol:
            raise ValueError(f"window truncation mass {spill:.3e} at grid edge exceeds {tol}")

    def _build_kernels(self):
        """Dense per-axis Fourier kernels for the general path."""
        kernels = []
        for i in range(self.grid.dim):
            p = self.grid.p_axis(i)
            x = self.xgrid.axis(i)
            kernels.append(np.exp(-1j * np.outer(p, x) / self.hbar))
        return kernels

    # -- analysis -----------------------------------------------------------------
    def analyze(self, psi: XState) -> PhaseField:
        """W: x wavefunction -> phase-space field."""
        if psi.xgrid != self.xgrid:
            raise ValueError("state lives on a different x grid")
        if self.path == "fft":
            values = self._analyze_fft(psi.values)
        else:
            values = self._analyze_kernel(psi.values)
        return PhaseField(self.grid, values)

    def _analyze_fft(self, psi: np.ndarray) -> np.ndarray:
        n, d = self.xgrid.n, self.xgrid.dim
        idx = _roll_index(n)
        if d == 1:
            g = self._wsamp[None, :] * psi[idx]          # [k, j]
            out = centered_fft(g, axis=1)                # j -> p index
            return out.T * self.xgrid.cell_volume
        i1 = idx[:, None, :, None]
        i2 = idx[None, :, None, :]
        g = self._wsamp[None, None, :, :] * psi[i1, i2]  # [k1, k2, j1, j2]
        out = centered_fft(centered_fft(g, axis=2), axis=3)
        return out.transpose(2, 3, 0, 1) * self.xgrid.cell_volume

    def _analyze_kernel(self, psi: np.ndarray) -> np.ndarray:
        d = self.grid.dim
        if d == 1:
            (ker,) = self._kernels
            q = self.grid.q_axis(0)
            x = self.xgrid.axis(0)
            out = np.empty((self.grid.n_p, self.grid.n_q), dtype=complex)
            for b, qb in enumerate(q):
                u = x - qb
                w = self.window(u)
                phase = np.exp(1j * self.grid.p_axis(0) * qb / self.hbar)
                out[:, b] = phase * (ker @ (w * psi)) * self.xgrid.dx[0]
            return out
        k1, k2 = self._kernels
        x1, x2 = self.xgrid.axis(0), self.xgrid.axis(1)
        q1, q2 = self.grid.q_axis(0), self.grid.q_axis(1)
        p1, p2 = self.grid.p_axis(0), self.grid.p_axis(1)
        out = np.empty(self.grid.shape, dtype=complex)
        cell = self.xgrid.cell_volume
        for b1, qb1 in enumerate(q1):
            w1phase = np.exp(1j * p1 * qb1 / self.hbar)
            for b2, qb2 in enumerate(q2):
                w = self.window(x1[:, None] - qb1, x2[None, :] - qb2)
                slab = k1 @ (w * psi) @ k2.T
                phase = w1phase[:, None] * np.exp(1j * p2 * qb2 / self.hbar)[None, :]
                out[:, :, b1, b2] = phase * slab * cell
        return out

    # -- synthesis ------------------------------------------------------------------
    def synthesize(self, phi: PhaseField) -> XState:
        """W^dag: phase-space field -> x wavefunction."""
        if phi.grid != self.grid:
            raise ValueError("field lives on a different phase grid")
        if self.path == "fft":
            values = self._synthesize_fft(phi.values)
        else:
            values = self._synthesize_kernel(phi.values)
        return XState(self.xgrid, values)

    def _synthesize_fft(self, phi: np.ndarray) -> np.ndarray:
        n, d = self.xgrid.n, self.xgrid.dim
        cell = self.grid.cell_volume
        gidx = _gather_index(n)
        if d == 1:
            s = centered_ifft(phi, axis=0)               # [j, k]
            m = s.T[gidx, np.arange(n)[None, :]]         # [i, j] -> s[j, k(i,j)]
            return (m @ np.conj(self._wsamp)) * cell
        s = centered_ifft(centered_ifft(phi, axis=0), axis=1)  # [j1, j2, k1, k2]
        j1 = np.arange(n).reshape(1, 1, n, 1)
        j2 = np.arange(n).reshape(1, 1, 1, n)
        g1 = gidx.reshape(n, 1, n, 1)
        g2 = gidx.reshape(1, n, 1, n)
        m = s[j1, j2, g1, g2]                            # [i1, i2, j1, j2]
        return np.einsum("xyjk,jk->xy", m, np.conj(self._wsamp)) * cell

    def _synthesize_kernel(self, phi: np.ndarray) -> np.ndarray:
        d = self.grid.dim
        cell = self.grid.cell_volume
        if d == 1:
            (ker,) = self._kernels
            q = self.grid.q_axis(0)
            x = self.xgrid.axis(0)
            out = np.zeros(self.xgrid.shape, dtype=complex)
            for b, qb in enumerate(q):
                u = x - qb
                w = self.window(u)
                phase = np.exp(-1j * self.grid.p_axis(0) * qb / self.hbar)
                out += np.conj(w) * (ker.conj().T @ (phase * phi[:, b]))
            return out * cell
        k1, k2 = self._kernels
        x1, x2 = self.xgrid.axis(0), self.xgrid.axis(1)
        q1, q2 = self.grid.q_axis(0), self.grid.q_axis(1)
        p1, p2 = self.grid.p_axis(0), self.grid.p_axis(1)
        out = np.zeros(self.xgrid.shape, dtype=complex)
        for b1, qb1 in enumerate(q1):
            ph1 = np.exp(-1j * p1 * qb1 / self.hbar)
            for b2, qb2 in enumerate(q2):
                w = self.window(x1[:, None] - qb1, x2[None, :] - qb2)
                phase = ph1[:, None] * np.exp(-1j * p2 * qb2 / self.hbar)[None, :]
                slab = k1.conj().T @ (phase * phi[:, :, b1, b2]) @ k2.conj()
                out += np.conj(w) * slab
        return out * cell

    def project(self, phi: PhaseField) -> PhaseField:
        """Pi = W W^dag: orthogonal projector onto the subspace."""
        return self.analyze(self.synthesize(phi))

    def subspace_defect(self, phi: PhaseField) -> float:
        """|| Pi phi - phi || / || phi ||: how far phi sits from the subspace."""
        proj = self.project(phi)
        return float(
            np.sqrt(np.sum(np.abs(proj.values - phi.values) ** 2) * self.grid.cell_volume)
            / max(phi.norm(), 1e-300)
        )


# -- coherent states -------------------------------------------------------------

def coherent_state(frame: FrameMaps, p0, q0):
    """xi_{p,q} = Pi |p,q>: returns (XState, PhaseField image).

    The x representation is conj(Phi(x - q0)) exp[(i/hbar) p0.(x - q0)]; it
    carries the natural norm ||xi||^2 = h^-dim, not norm 1.
    """
    xg = frame.xgrid
    p0 = np.atleast_1d(np.asarray(p0, dtype=float))
    q0 = np.atleast_1d(np.asarray(q0, dtype=float))
    offs = tuple(xg.broadcast(i) - q0[i] for i in range(xg.dim))
    w = np.conj(np.broadcast_to(np.asarray(frame.window(*offs)), xg.shape))
    phase = np.exp(1j / frame.hbar * sum(p0[i] * offs[i] for i in range(xg.dim)))
    xi = XState(xg, w * phase)
    return xi, frame.analyze(xi)


def coherent_norm_squared(window: Window) -> float:
    """||xi||^2 for a radial3d window: (2S+1) h^-3 via radial quadrature."""
    from .windows import radial_rule

    if window.family != "radial3d":
        raise ValueError("use coherent_state on gridded frames")
    u, wq = radial_rule()
    prof = window.radial_profile(u)
    radial = float(np.sum(wq * u**2 * prof**2))  # = 1 for a normalized profile
    count = 2 * window.index + 1
    return count * radial / window.h**3


def quasi_projector_trace(frame: FrameMaps, region) -> float:
    """Tr[Pi_S Pi(A) Pi_S] = int_A ||xi_{p,q}||^2 dp dq by grid quadrature."""
    g = frame.grid
    xg = frame.xgrid
    ps, qs = g.coords()
    mask = np.broadcast_to(np.asarray(region(ps, qs), dtype=bool), g.shape)
    # ||xi_{p,q}||^2 is p-independent: sum_x |Phi(x - q)|^2 dx per q cell
    qshape = (g.n_q,) * g.dim
    norms = np.empty(qshape)
    for idx in np.ndindex(qshape):
        offs = tuple(xg.broadcast(i) - g.q_axis(i)[idx[i]] for i in range(g.dim))
        w = np.asarray(frame.window(*offs))
        norms[idx] = float(np.sum(np.abs(w) ** 2) * xg.cell_volume)
    weights = mask.reshape(g.n_p**g.dim, g.n_q**g.dim).sum(axis=0).reshape(qshape)
    return float(np.sum(weights * norms) * g.cell_volume)


# -- discrete symmetries on x space and sign verification ---------------------------

def x_parity(psi: XState) -> XState:
    """psi(x) -> psi(-x) on a centered grid."""
    v = psi.values
    for ax in range(psi.xgrid.dim):
        v = np.roll(np.flip(v, axis=ax), 1, axis=ax)
    return XState(psi.xgrid, v)


def _matched_coefficient(result: PhaseField, reference: PhaseField):
    """Least-squares scalar c with result ~ c * reference, plus the residual."""
    denom = reference.inner(reference).real
    c = reference.inner(result) / denom
    diff = result.values - c * reference.values
    resid = math.sqrt(float(np.sum(np.abs(diff) ** 2)) * result.grid.cell_volume)
    return c, resid / math.sqrt(denom)


def discrete_symmetry_signs(frame: FrameMaps, rng=None) -> dict:
    """Measure the parity, symplectic and time-reversal signs of the window.

    Applies the actual grid operators to an analyzed state and reads the
    coefficient against the analytically expected image.  Returns a report
    dict with measured coefficients, expected signs and match residuals.
    """
    from .galileo import fundamental_symplectic, parity, time_reversal

    win = frame.window
    xg = frame.xgrid
    if rng is None:
        rng = np.random.default_rng(7)

    # smooth in-grid test state: displaced Gaussian bump
    offs = xg.coords()
    width = max(win.lam, math.sqrt(2.0 * frame.hbar))
    shift = 0.35 * width
    env = np.exp(-sum((o - shift) ** 2 for o in offs) / (2.0 * width**2))
    psi = XState(xg, np.broadcast_to(env, xg.shape).astype(complex)).normalized()
    phi = frame.analyze(psi)

    ks = fundamental_symplectic(frame.grid)
    report = {}

    c, resid = _matched_coefficient(ks.apply(phi), phi)
    report["ks"] = {"measured": c, "expected": win.ks_sign, "residual": resid}

    ref_parity = frame.analyze(x_parity(psi))
    c, resid = _matched_coefficient(parity(phi), ref_parity)
    report["parity"] = {"measured": c, "expected": win.parity_sign, "residual": resid}

    partner, tr_sign = win.time_reversal_partner()
    if partner == win:
        ref_tr = frame.analyze(XState(xg, np.conj(psi.values)))
    else:
        partner_frame = FrameMaps(partner, xg, frame.grid)
        ref_tr = partner_frame.analyze(XState(xg, np.conj(psi.values)))
    c, resid = _matched_coefficient(time_reversal(phi), ref_tr)
    report["time_reversal"] = {"measured": c, "expected": tr_sign, "residual": resid}
    return report
