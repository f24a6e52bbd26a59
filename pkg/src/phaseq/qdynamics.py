"""Schroedinger propagation of projected states and phase-space diagnostics.

The quantum density rho_t(p,q) = |(W psi_t)(p,q)|^2 satisfies the expectation
("weak") equations of motion

    d<Q>/dt = int grad_p H rho_t,   d<P>/dt = - int grad_q H rho_t

for Hamiltonians of classical origin, while failing the pointwise Liouville
equation for anharmonic H; both residuals are measured here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .frames import FrameMaps, XState
from .koopman import liouville_propagate
from .phase_grid import PhaseField, PhaseGrid, Symbol
from .quantize import QuantizedOperator
from .spectral import angular_freqs, spectral_derivative

__all__ = [
    "EvolutionRecord",
    "schrodinger_propagate",
    "husimi",
    "weak_equation_residuals",
    "compare_classical_quantum",
]


@dataclass
class EvolutionRecord:
    """Per-sample scalars of a propagation run, plus optional density snapshots."""

    t: np.ndarray
    q_mean: np.ndarray          # (n_samples, dim)
    p_mean: np.ndarray
    energy: np.ndarray
    norm: np.ndarray
    weak_res_q: np.ndarray      # (n_samples, dim); NaN where not computable
    weak_res_p: np.ndarray
    liouville_res: np.ndarray   # (n_samples,)
    provenance: dict = field(default_factory=dict)
    husimi_grid: PhaseGrid | None = None
    husimi_rhos: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.q_mean.shape[1]

    def check(self, tol: float = 1e-8):
        if np.any(np.diff(self.t) <= 0) and len(self.t) > 1:
            raise ValueError("time samples must be increasing")
        drift = float(np.abs(self.norm - 1.0).max())
        if drift > tol:
            raise ValueError(f"norm drift {drift:.3e} exceeds {tol}")
        return self


def _mean_position(psi: XState) -> np.ndarray:
    xg = psi.xgrid
    dens = np.abs(psi.values) ** 2
    return np.array(
        [float(np.sum(np.broadcast_to(xg.broadcast(i), xg.shape) * dens) * xg.cell_volume)
         for i in range(xg.dim)]
    )


def _mean_momentum(psi: XState, hbar: float) -> np.ndarray:
    xg = psi.xgrid
    out = np.empty(xg.dim)
    for i in range(xg.dim):
        dpsi = spectral_derivative(psi.values, xg.dx[i], axis=i)
        out[i] = float((np.vdot(psi.values, -1j * hbar * dpsi) * xg.cell_volume).real)
    return out


def husimi(psi: XState, frame: FrameMaps, stride: int = 1) -> PhaseField:
    """rho(p, q) = |(W psi)(p, q)|^2, optionally decimated by `stride`."""
    phi = frame.analyze(psi)
    rho = np.abs(phi.values) ** 2
    if stride > 1:
        grid = _decimated_grid(frame.grid, stride)
        sl = tuple(slice(None, None, stride) for _ in range(2 * frame.grid.dim))
        rho = rho[sl]
    else:
        grid = frame.grid
    return PhaseField(grid, rho, role="symbol")


def _decimated_grid(grid: PhaseGrid, stride: int) -> PhaseGrid:
    if grid.n_p % stride or grid.n_q % stride:
        raise ValueError("stride must divide the grid counts")
    if (grid.n_p // stride) % 2 or (grid.n_q // stride) % 2:
        raise ValueError("decimated counts must stay even")
    return PhaseGrid(grid.dim, grid.p_extent, grid.q_extent,
                     grid.n_p // stride, grid.n_q // stride, grid.hbar)


class _WeakTerms:
    """Precomputed symbol gradients on a (possibly decimated) phase grid."""

    def __init__(self, h_symbol: Symbol, grid: PhaseGrid):
        self.grid = grid
        gp, gq = h_symbol.sample_grads(grid)
        self.gp = [np.broadcast_to(np.asarray(a, dtype=float), grid.shape) for a in gp]
        self.gq = [np.broadcast_to(np.asarray(a, dtype=float), grid.shape) for a in gq]

    def flow_terms(self, rho: np.ndarray):
        cell = self.grid.cell_volume
        term_q = np.array([float(np.sum(g * rho) * cell) for g in self.gp])
        term_p = np.array([float(np.sum(g * rho) * cell) for g in self.gq])
        return term_q, term_p

    def bracket(self, rho: np.ndarray) -> np.ndarray:
        """{H, rho} with spectral derivatives of rho."""
        g = self.grid
        out = np.zeros(g.shape)
        for i in range(g.dim):
            out += self.gp[i] * spectral_derivative(rho, g.dq[i], axis=g.dim + i).real
            out -= self.gq[i] * spectral_derivative(rho, g.dp[i], axis=i).real
        return out


def _fill_residuals(record: EvolutionRecord, rhos: list, terms: _WeakTerms):
    """Centered-difference weak and Liouville residuals at the sample times."""
    n = len(record.t)
    if n < 3:
        raise ValueError("need at least 3 samples for residuals")
    cell = terms.grid.cell_volume
    for k in range(n):
        lo, hi = max(k - 1, 0), min(k + 1, n - 1)
        dt = record.t[hi] - record.t[lo]
        dq = (record.q_mean[hi] - record.q_mean[lo]) / dt
        dp = (record.p_mean[hi] - record.p_mean[lo]) / dt
        term_q, term_p = terms.flow_terms(rhos[k])
        record.weak_res_q[k] = dq - term_q
        record.weak_res_p[k] = dp + term_p
        drho = (rhos[hi] - rhos[lo]) / dt
        br = terms.bracket(rhos[k])
        denom = math.sqrt(float(np.sum(br**2)) * cell)
        num = math.sqrt(float(np.sum((drho + br) ** 2)) * cell)
        record.liouville_res[k] = num / max(denom, 1e-300)
    return record


def schrodinger_propagate(
    psi0: XState,
    hamiltonian: QuantizedOperator,
    t_final: float,
    steps: int,
    method: str = "auto",
    record_every: int = 1,
    frame: FrameMaps | None = None,
    h_symbol: Symbol | None = None,
    husimi_stride: int = 1,
    keep_husimi: bool = False,
):
    """Unitary propagation under i hbar d/dt psi = H psi.

    Split-operator (Strang) when H is kinetic + multiplication; dense
    eigendecomposition otherwise (small grids only).  When `frame` and
    `h_symbol` are given, Husimi densities are formed at each recorded sample
    and the weak/Liouville residual columns are filled.

    Returns (final XState, EvolutionRecord).
    """
    xg = psi0.xgrid
    if hamiltonian.xgrid != xg:
        raise ValueError("Hamiltonian and state grids differ")
    if keep_husimi and frame is None:
        raise ValueError("keep_husimi needs a frame")
    hbar = frame.hbar if frame is not None else _guess_hbar(hamiltonian)
    if method == "auto":
        if hamiltonian.splittable:
            method = "split"
        elif xg.n**xg.dim <= 1400:
            method = "dense"
        else:
            raise ValueError(
                "capability: Hamiltonian is not splittable and the grid is too "
                "large for the dense route"
            )
    if method == "split" and not hamiltonian.splittable:
        raise ValueError("capability: Hamiltonian is not splittable")

    n_rec = (steps // record_every if steps else 0) + 1
    rec = EvolutionRecord(
        t=np.zeros(n_rec),
        q_mean=np.zeros((n_rec, xg.dim)),
        p_mean=np.zeros((n_rec, xg.dim)),
        energy=np.zeros(n_rec),
        norm=np.zeros(n_rec),
        weak_res_q=np.full((n_rec, xg.dim), np.nan),
        weak_res_p=np.full((n_rec, xg.dim), np.nan),
        liouville_res=np.full(n_rec, np.nan),
        provenance={
            "method": method,
            "steps": steps,
            "t_final": t_final,
            "record_every": record_every,
            "hamiltonian": hamiltonian.provenance,
        },
    )

    want_husimi = frame is not None and h_symbol is not None
    rhos = [] if (want_husimi or keep_husimi) else None
    terms = None
    if want_husimi:
        probe = husimi(psi0, frame, husimi_stride)
        terms = _WeakTerms(h_symbol, probe.grid)
        rec.husimi_grid = probe.grid

    def observe(k, psi):
        rec.t[k] = k * record_every * (t_final / steps) if steps else 0.0
        rec.q_mean[k] = _mean_position(psi)
        rec.p_mean[k] = _mean_momentum(psi, hbar)
        rec.energy[k] = float(psi.inner(hamiltonian.apply(psi)).real)
        rec.norm[k] = psi.norm()
        if rhos is not None and (want_husimi or keep_husimi):
            rhos.append(husimi(psi, frame, husimi_stride).values)

    observe(0, psi0)
    psi = psi0
    if steps:
        dt = t_final / steps
        stepper = _make_stepper(hamiltonian, dt, hbar, method)
        values = psi0.values.copy()
        for k in range(steps):
            values = stepper(values)
            if (k + 1) % record_every == 0:
                psi = XState(xg, values)
                observe((k + 1) // record_every, psi)
        psi = XState(xg, values)

    if want_husimi and len(rec.t) >= 3:
        _fill_residuals(rec, rhos, terms)
    elif len(rec.t) == 1:
        rec.weak_res_q[:] = 0.0
        rec.weak_res_p[:] = 0.0
        rec.liouville_res[:] = 0.0
    if keep_husimi and rhos is not None:
        rec.husimi_rhos = [r for r in rhos]
        if rec.husimi_grid is None and frame is not None:
            rec.husimi_grid = husimi(psi0, frame, husimi_stride).grid
    rec.check()
    return psi, rec


def _guess_hbar(hamiltonian: QuantizedOperator) -> float:
    return float(hamiltonian.provenance.get("hbar", 1.0))


def _make_stepper(h: QuantizedOperator, dt: float, hbar: float, method: str):
    xg = h.xgrid
    axes = tuple(range(xg.dim))
    if method == "split":
        vloc = (h.mult if h.mult is not None else 0.0) + h.const
        expv = np.exp(-0.5j * dt / hbar * vloc)
        if np.ndim(expv) == 0:
            expv = np.full(xg.shape, expv)
        kin = h.kmult if h.kmult is not None else np.zeros(xg.shape)
        expk = np.exp(-1j * dt / hbar * kin)

        def step(values):
            v = expv * values
            v = np.fft.ifftn(expk * np.fft.fftn(v, axes=axes), axes=axes)
            return expv * v

        return step
    if method == "dense":
        mat = h.matrix()
        evals, evecs = np.linalg.eigh(mat)
        phase = np.exp(-1j * dt / hbar * evals)

        def step(values):
            c = evecs.conj().T @ values.reshape(-1)
            return (evecs @ (phase * c)).reshape(xg.shape)

        return step
    raise ValueError(f"unknown method {method!r}")


def weak_equation_residuals(record: EvolutionRecord, h_symbol: Symbol,
                            frame: FrameMaps) -> EvolutionRecord:
    """Fill the weak/Liouville residual columns of a record that carries
    stored Husimi snapshots (at least 3 samples)."""
    if len(record.husimi_rhos) != len(record.t):
        raise ValueError("record has no per-sample Husimi snapshots")
    if len(record.t) < 3:
        raise ValueError("need at least 3 samples for residuals")
    grid = record.husimi_grid or frame.grid
    terms = _WeakTerms(h_symbol, grid)
    return _fill_residuals(record, record.husimi_rhos, terms)


def compare_classical_quantum(
    frame: FrameMaps,
    h_symbol: Symbol,
    hamiltonian: QuantizedOperator,
    psi0: XState,
    t_final: float,
    steps: int,
    n_samples: int = 20,
    method: str = "auto",
):
    """Liouville-evolve the initial Husimi density and compare against the
    quantum Husimi flow: L1 distances and expectation gaps per sample.
    """
    record_every = max(1, steps // max(n_samples, 1))
    steps = record_every * max(n_samples, 1)  # keep samples aligned
    _, rec = schrodinger_propagate(
        psi0, hamiltonian, t_final, steps,
        method=method, record_every=record_every,
        frame=frame, h_symbol=h_symbol, keep_husimi=True,
    )
    rho0 = rec.husimi_rhos[0]
    grid = rec.husimi_grid
    phi_cl = PhaseField(grid, np.sqrt(np.maximum(rho0, 0.0)))
    _, samples = liouville_propagate(
        phi_cl, h_symbol, t_final, steps, sample_every=record_every
    )
    if len(samples) != len(rec.t):
        raise RuntimeError("classical/quantum sample misalignment")
    ps, qs = grid.coords()
    cell = grid.cell_volume
    l1 = np.empty(len(rec.t))
    gap_q = np.empty((len(rec.t), grid.dim))
    gap_p = np.empty((len(rec.t), grid.dim))
    cl_q = np.empty((len(rec.t), grid.dim))
    cl_p = np.empty((len(rec.t), grid.dim))
    for k, (tk, fld) in enumerate(samples):
        rho_cl = np.abs(fld.values) ** 2
        l1[k] = float(np.sum(np.abs(rho_cl - rec.husimi_rhos[k])) * cell)
        for i in range(grid.dim):
            cl_q[k, i] = float(np.sum(qs[i] * rho_cl) * cell)
            cl_p[k, i] = float(np.sum(ps[i] * rho_cl) * cell)
        gap_q[k] = np.abs(cl_q[k] - rec.q_mean[k])
        gap_p[k] = np.abs(cl_p[k] - rec.p_mean[k])
    return {
        "t": rec.t.copy(),
        "l1_distance": l1,
        "gap_q": gap_q,
        "gap_p": gap_p,
        "classical_q": cl_q,
        "classical_p": cl_p,
        "quantum_record": rec,
    }
