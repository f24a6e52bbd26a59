"""Projection quantization F = Pi f Pi realized on the position representation.

Two routes with mandatory cross-validation:

* grid route     -- psi |-> W^dag ( f . (W psi) ): the direct discretization
                    of the projected multiplication operator;
* closed forms   -- mollified potentials V_eff = V * kappa with
                    kappa(u) = h^d |Phi(-u)|^2, the spectral kinetic term with
                    its offset E0, and the wedge operators with the L - S
                    constant shift.

Energy offsets: E0 = hbar^2 chi^2 / (2 M lambda^2) and
E1 = (1/2) M omega^2 lambda^2 eta^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .frames import FrameMaps, XGrid, XState
from .phase_grid import DensityModel, PhaseField, Symbol
from .spectral import angular_freqs, spectral_derivative
from .windows import Window, chi_squared, eta_squared

__all__ = [
    "QuantizedOperator",
    "SpinAlgebra",
    "EnergyConstants",
    "energy_constants",
    "quantize_grid_route",
    "quantize_potential",
    "free_hamiltonian",
    "harmonic_hamiltonian",
    "angular_spin_operators",
    "wedge_identity_residual",
    "orbital_operator",
    "magnetic_hamiltonian",
    "semiclassical_expectation",
    "operator_expectation",
]

DENSE_LIMIT = 1400  # largest x-grid cell count worth materializing densely


def _kmesh_squared(xgrid: XGrid) -> np.ndarray:
    total = np.zeros(xgrid.shape)
    for i in range(xgrid.dim):
        k = angular_freqs(xgrid.n, xgrid.dx[i])
        shape = [1] * xgrid.dim
        shape[i] = xgrid.n
        total = total + k.reshape(shape) ** 2
    return total


@dataclass
class QuantizedOperator:
    """Operator on x-space states, structured for split propagation.

    apply(psi) = mult * psi + IFFT(kmult * FFT(psi)) + const * psi + raw(psi).
    `raw` covers closures like the grid quantization route; operators with a
    raw part (and no dense form) cannot be split-propagated.
    """

    xgrid: XGrid
    mult: np.ndarray | None = None
    kmult: np.ndarray | None = None
    const: float = 0.0
    raw: object = None
    provenance: dict = field(default_factory=dict)
    _dense: np.ndarray = field(default=None, repr=False)

    def apply(self, psi: XState) -> XState:
        if psi.xgrid != self.xgrid:
            raise ValueError("state lives on a different grid")
        v = psi.values
        out = np.zeros_like(v)
        if self.mult is not None:
            out = out + self.mult * v
        if self.kmult is not None:
            axes = tuple(range(self.xgrid.dim))
            out = out + np.fft.ifftn(self.kmult * np.fft.fftn(v, axes=axes), axes=axes)
        if self.const:
            out = out + self.const * v
        if self.raw is not None:
            out = out + self.raw(v)
        return XState(self.xgrid, out)

    def __call__(self, psi: XState) -> XState:
        return self.apply(psi)

    def __add__(self, other: "QuantizedOperator") -> "QuantizedOperator":
        if other.xgrid != self.xgrid:
            raise ValueError("grid mismatch")

        def both(raw1, raw2):
            if raw1 is None:
                return raw2
            if raw2 is None:
                return raw1
            return lambda v: raw1(v) + raw2(v)

        def add_opt(a, b):
            if a is None:
                return None if b is None else np.array(b, copy=True)
            return a + b if b is not None else np.array(a, copy=True)

        return QuantizedOperator(
            self.xgrid,
            mult=add_opt(self.mult, other.mult),
            kmult=add_opt(self.kmult, other.kmult),
            const=self.const + other.const,
            raw=both(self.raw, other.raw),
            provenance={"sum": [self.provenance, other.provenance]},
        )

    @property
    def splittable(self) -> bool:
        return self.raw is None

    def matrix(self, limit: int = DENSE_LIMIT) -> np.ndarray:
        """Dense matrix in the grid basis (column-by-column application)."""
        cells = self.xgrid.n**self.xgrid.dim
        if cells > limit:
            raise ValueError(f"dense assembly of {cells} cells exceeds limit {limit}")
        if self._dense is None:
            mat = np.empty((cells, cells), dtype=complex)
            basis = np.zeros(self.xgrid.shape, dtype=complex)
            flat = basis.reshape(-1)
            for j in range(cells):
                flat[j] = 1.0
                mat[:, j] = self.apply(XState(self.xgrid, basis)).values.reshape(-1)
                flat[j] = 0.0
            self._dense = mat
        return self._dense

    def hermiticity_residual(self, limit: int = DENSE_LIMIT) -> float:
        m = self.matrix(limit)
        scale = max(np.abs(m).max(), 1e-300)
        return float(np.abs(m - m.conj().T).max() / scale)

    def eigenvalues(self, limit: int = DENSE_LIMIT) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix(limit))


def operator_expectation(op: QuantizedOperator, psi: XState) -> float:
    return float(psi.inner(op.apply(psi)).real)


# -- grid route -----------------------------------------------------------------

def _check_symbol_resolution(values: np.ndarray):
    """Flag symbols that change by more than half their range per cell."""
    rng = float(values.max() - values.min())
    if rng == 0.0:
        return
    for ax in range(values.ndim):
        step = float(np.abs(np.diff(values, axis=ax)).max())
        if step > 0.5 * rng:
            raise ValueError(
                f"symbol aliasing: per-cell change {step:.3g} exceeds half the "
                f"range {rng:.3g} along axis {ax}"
            )


def quantize_grid_route(symbol: Symbol, frame: FrameMaps) -> QuantizedOperator:
    """F: psi -> W^dag ( f . (W psi) ), the direct projected multiplication."""
    fvals = symbol.sample(frame.grid)
    if not np.all(np.isfinite(fvals)):
        raise ValueError("symbol not finite on the phase grid")
    _check_symbol_resolution(fvals)

    def raw(v):
        phi = frame.analyze(XState(frame.xgrid, v))
        cut = PhaseField(frame.grid, fvals * phi.values)
        return frame.synthesize(cut).values

    return QuantizedOperator(
        frame.xgrid,
        raw=raw,
        provenance={"route": "grid", "symbol": repr(symbol), "window": repr(frame.window)},
    )


# -- mollified potentials ----------------------------------------------------------

def _window_density(frame: FrameMaps) -> np.ndarray:
    """kappa(u) = h^d |Phi(-u)|^2 sampled on centered offsets; unit mass."""
    w = frame._wsamp
    dens = np.abs(w) ** 2 * frame.h**frame.xgrid.dim
    for ax in range(frame.xgrid.dim):
        dens = np.roll(np.flip(dens, axis=ax), 1, axis=ax)
    return dens


def quantize_potential(potential, frame: FrameMaps):
    """Multiplication by V_eff = V * kappa (FFT convolution on the x grid).

    `potential` is a callable of the x coordinate arrays or a sampled array.
    Returns (operator, diagnostics) where diagnostics reports the sup-norm
    of the lambda^2-order correction V_eff - V.
    """
    xg = frame.xgrid
    if callable(potential):
        v = np.broadcast_to(np.asarray(potential(*xg.coords()), dtype=float), xg.shape)
    else:
        v = np.asarray(potential, dtype=float)
        if v.shape != xg.shape:
            raise ValueError("sampled potential has wrong shape")
    kappa = _window_density(frame)
    axes = tuple(range(xg.dim))
    conv = np.fft.ifftn(
        np.fft.fftn(v, axes=axes) * np.fft.fftn(np.fft.ifftshift(kappa), axes=axes),
        axes=axes,
    ).real * xg.cell_volume
    op = QuantizedOperator(
        xg, mult=conv, provenance={"route": "mollified-potential", "window": repr(frame.window)}
    )
    diag = {"correction_sup": float(np.abs(conv - v).max())}
    return op, diag


# -- energy constants and Hamiltonians ------------------------------------------------

@dataclass(frozen=True)
class EnergyConstants:
    """Window-induced offsets of the quantized free/harmonic Hamiltonians."""

    lam: float
    mass: float
    hbar: float
    chi2: float
    eta2: float
    omega: float | None = None

    @property
    def e0(self) -> float:
        return self.hbar**2 * self.chi2 / (2.0 * self.mass * self.lam**2)

    @property
    def e1(self) -> float:
        if self.omega is None:
            return 0.0
        return 0.5 * self.mass * self.omega**2 * self.lam**2 * self.eta2


def _grid_chi_eta(frame: FrameMaps):
    """Dimensionless chi^2 and eta^2 from x-grid quadrature of the window."""
    xg = frame.xgrid
    w = frame._wsamp
    hd = frame.h**xg.dim
    grad2 = np.zeros(xg.shape)
    r2 = np.zeros(xg.shape)
    for i in range(xg.dim):
        dw = spectral_derivative(w, xg.dx[i], axis=i)
        grad2 = grad2 + np.abs(dw) ** 2
        r2 = r2 + np.broadcast_to(xg.broadcast(i), xg.shape) ** 2
    chi2 = float(np.sum(grad2) * xg.cell_volume * hd) * frame.window.lam**2
    eta2 = float(np.sum(r2 * np.abs(w) ** 2) * xg.cell_volume * hd) / frame.window.lam**2
    return chi2, eta2


def energy_constants(window: Window, mass: float, omega: float | None = None,
                     frame: FrameMaps | None = None) -> EnergyConstants:
    """chi^2/eta^2 by quadrature: radial rule in 3D, x-grid quadrature else."""
    if window.family == "radial3d":
        chi2 = chi_squared(window)
        eta2 = eta_squared(window)
    else:
        if frame is None:
            raise ValueError("gridded windows need a FrameMaps for quadrature")
        chi2, eta2 = _grid_chi_eta(frame)
    return EnergyConstants(window.lam, mass, window.hbar, chi2, eta2, omega)


def free_hamiltonian(frame: FrameMaps, mass: float):
    """H = -hbar^2 Laplacian / 2M + E0 with E0 from the window quadrature."""
    consts = energy_constants(frame.window, mass, frame=frame)
    kmult = frame.hbar**2 * _kmesh_squared(frame.xgrid) / (2.0 * mass)
    op = QuantizedOperator(
        frame.xgrid,
        kmult=kmult,
        const=consts.e0,
        provenance={"route": "free", "window": repr(frame.window), "mass": mass},
    )
    return op, consts


def harmonic_hamiltonian(frame: FrameMaps, mass: float, omega: float):
    """Free part plus the mollified harmonic potential (E1 appears exactly)."""
    kin, consts = free_hamiltonian(frame, mass)
    consts = EnergyConstants(consts.lam, mass, consts.hbar, consts.chi2, consts.eta2, omega)

    def vharm(*coords):
        return 0.5 * mass * omega**2 * sum(np.asarray(c) ** 2 for c in coords)

    pot, _ = quantize_potential(vharm, frame)
    return kin + pot, consts


# -- spin algebra --------------------------------------------------------------------

class SpinAlgebra:
    """Standard (2S+1)-dimensional angular momentum matrices, hbar explicit."""

    def __init__(self, s: int, hbar: float = 1.0):
        if s < 0 or s != int(s):
            raise ValueError("integer spin required")
        self.s = int(s)
        self.hbar = hbar
        dim = 2 * self.s + 1
        m = np.arange(self.s, -self.s - 1, -1, dtype=float)
        self.sz = hbar * np.diag(m)
        plus = np.zeros((dim, dim))
        for k in range(dim - 1):
            mm = m[k + 1]
            plus[k, k + 1] = math.sqrt(self.s * (self.s + 1) - mm * (mm + 1))
        self.sp = hbar * plus
        self.sm = self.sp.conj().T
        self.sx = 0.5 * (self.sp + self.sm)
        self.sy = -0.5j * (self.sp - self.sm)

    @property
    def matrices(self):
        return self.sx, self.sy, self.sz

    def casimir(self) -> np.ndarray:
        return self.sx @ self.sx + self.sy @ self.sy + self.sz @ self.sz


# -- angular momentum / L - S identity --------------------------------------------------

def orbital_operator(xgrid: XGrid, hbar: float) -> QuantizedOperator:
    """L_z = x1 P2 - x2 P1 on a 2D x grid (spectral derivatives)."""
    if xgrid.dim < 2:
        raise ValueError("orbital angular momentum needs dim >= 2")
    x1 = xgrid.broadcast(0)
    x2 = xgrid.broadcast(1)

    def raw(v):
        d1 = spectral_derivative(v, xgrid.dx[0], axis=0)
        d2 = spectral_derivative(v, xgrid.dx[1], axis=1)
        return -1j * hbar * (x1 * d2 - x2 * d1)

    return QuantizedOperator(xgrid, raw=raw, provenance={"route": "orbital-Lz"})


def angular_spin_operators(frame: FrameMaps) -> dict:
    """L_z, winding spin, J_z and the grid-route wedge quantization (2D).

    The report compares the direct quantization of (q ^ p)_z against
    L_z - S_z (the winding number times hbar) and against the symmetrized
    composition of the already-quantized P and Q (which coincides with L_z
    because distinct components commute).
    """
    from .phase_grid import angular_symbol_z

    if frame.xgrid.dim != 2:
        raise ValueError("angular/spin operators are built on 2D frames")
    hbar = frame.hbar
    m = frame.window.index
    lz = orbital_operator(frame.xgrid, hbar)
    sz = m * hbar
    grid_route = quantize_grid_route(angular_symbol_z(2), frame)
    return {
        "L_z": lz,
        "S_z": sz,
        "J_z": lz + QuantizedOperator(frame.xgrid, const=sz),
        "grid_route": grid_route,
        "symmetrized_L": lz,  # Q and P components commute across axes
        "winding": m,
    }


def wedge_identity_residual(frame: FrameMaps, states=None, rng=None) -> float:
    """max_psi || (grid route)psi - (L_z - m hbar)psi || / ||psi||."""
    ops = angular_spin_operators(frame)
    if states is None:
        rng = rng or np.random.default_rng(11)
        states = [_probe_state(frame.xgrid, rng) for _ in range(3)]
    worst = 0.0
    for psi in states:
        lhs = ops["grid_route"].apply(psi).values
        rhs = ops["L_z"].apply(psi).values - ops["S_z"] * psi.values
        worst = max(worst, float(np.sqrt(np.sum(np.abs(lhs - rhs) ** 2)
                                         * frame.xgrid.cell_volume)) / psi.norm())
    return worst


def _probe_state(xgrid: XGrid, rng, width_scale: float = 0.22) -> XState:
    """Random smooth decaying state: Gaussian envelope times low-order poly."""
    coords = xgrid.coords()
    half = min(0.5 * (hi - lo) for lo, hi in xgrid.extent)
    sig = width_scale * 2 * half
    env = np.exp(-sum(np.broadcast_to(c, xgrid.shape) ** 2 for c in coords) / (2 * sig**2))
    poly = np.ones(xgrid.shape, dtype=complex)
    for c in coords:
        a, b = rng.standard_normal(2)
        poly = poly + (a + 1j * b) * 0.3 * np.broadcast_to(c, xgrid.shape) / half
    return XState(xgrid, env * poly).normalized()


# -- magnetic Hamiltonian ----------------------------------------------------------------

def magnetic_hamiltonian(frame: FrameMaps, mass: float, charge: float, b_field: float,
                         g_factor: float | None = None):
    """H = (P - eA(Q))^2 / 2M + (e/2M) B S_z + E0 + E1 for uniform B (2D).

    A(q) = (1/2) B ^ q.  The spin coefficient is not assumed: it is read off
    as the constant shift between the grid-route quantization of the cross
    term -(e/M) p.A(q) and its orbital part -(e/2M) B L_z.  An anomalous
    moment enters only through the optional configuration input `g_factor`
    as H_I = -(g+1)(e/2M) B S_z.

    Returns (operator, report) with the measured spin shift and its spread.
    """
    from .phase_grid import angular_symbol_z

    if frame.xgrid.dim != 2:
        raise ValueError("magnetic Hamiltonian is built on 2D frames (B out of plane)")
    if callable(b_field) or np.ndim(b_field) != 0:
        raise ValueError("only uniform B is supported")
    b = float(b_field)
    kin, consts = free_hamiltonian(frame, mass)
    if charge == 0.0 or b == 0.0:
        return kin, {"spin_shift": 0.0, "spread": 0.0, "constants": consts}

    coef = charge * b / (2.0 * mass)
    lz = orbital_operator(frame.xgrid, frame.hbar)
    cross_symbol = angular_symbol_z(2) * (-coef)
    cross_grid = quantize_grid_route(cross_symbol, frame)

    rng = np.random.default_rng(23)
    shifts = []
    for _ in range(2):
        psi = _probe_state(frame.xgrid, rng)
        delta = cross_grid.apply(psi).values - (-coef) * lz.apply(psi).values
        shifts.append(float(np.vdot(psi.values, delta).real * frame.xgrid.cell_volume))
    spin_shift = float(np.mean(shifts))
    spread = float(np.ptp(shifts))

    # diamagnetic term: harmonic with (1/2) M w_A^2 = e^2 B^2 / 8M
    omega_a = abs(charge * b) / (2.0 * mass)

    def va(*coords):
        return (charge**2 * b**2 / (8.0 * mass)) * sum(np.asarray(c) ** 2 for c in coords)

    dia, _ = quantize_potential(va, frame)
    cross = QuantizedOperator(
        frame.xgrid,
        raw=lambda v, _l=lz, _c=-coef: _c * _l.raw(v),
        const=spin_shift,
        provenance={"route": "magnetic-cross"},
    )
    total = kin + cross + dia
    if g_factor is not None:
        anomalous = -(g_factor + 1.0) * coef * frame.window.index * frame.hbar
        total = total + QuantizedOperator(frame.xgrid, const=anomalous,
                                          provenance={"route": "anomalous-moment"})
    consts = EnergyConstants(consts.lam, mass, consts.hbar, consts.chi2, consts.eta2, omega_a)
    report = {"spin_shift": spin_shift, "spread": spread, "constants": consts,
              "expected_shift": coef * frame.window.index * frame.hbar}
    return total, report


# -- semi-classical expectation -------------------------------------------------------------

def semiclassical_expectation(symbol: Symbol, density, frame: FrameMaps,
                              defect_tol: float = 1e-6) -> float:
    """<F> as the classical integral int f(p,q) rho(p,q) dp dq.

    `density` is a DensityModel over phase-space fields (components must sit
    in the frame's subspace; larger defects are flagged) or a list of
    (weight, XState) pairs which are analyzed first.
    """
    if isinstance(density, DensityModel):
        for _, comp in density.components:
            defect = frame.subspace_defect(comp)
            if defect > defect_tol:
                raise ValueError(f"density component out of subspace: defect {defect:.3e}")
        model = density
    else:
        comps = [(w, frame.analyze(st).normalized()) for w, st in density]
        model = DensityModel(comps)
    fvals = symbol.sample(frame.grid)
    return float(np.sum(fvals * model.rho()) * frame.grid.cell_volume)
