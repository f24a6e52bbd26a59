"""Poisson brackets, Koopman generators and Liouville transport.

The bracket convention throughout is

    {f, g} = grad_p f . grad_q g - grad_p g . grad_q f

(the sign opposite to the common textbook one), so that trajectories obey
dq/dt = grad_p H, dp/dt = -grad_q H and densities obey d(rho)/dt = -{H, rho}.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .phase_grid import (
    CallableSymbol,
    LinearOperator,
    PhaseField,
    PhaseGrid,
    PolynomialSymbol,
    SampledSymbol,
    Symbol,
)
from .spectral import spectral_shift

__all__ = [
    "poisson_bracket",
    "KoopmanGenerator",
    "apply_generator",
    "liouville_propagate",
    "classical_flow",
    "ClassicalTrajectory",
]


def poisson_bracket(f: Symbol, g: Symbol) -> Symbol:
    """{f, g} in the convention above; exact for polynomial symbols."""
    if f.dim != g.dim:
        raise ValueError("bracket of symbols with different dimensions")
    dim = f.dim
    if isinstance(f, PolynomialSymbol) and isinstance(g, PolynomialSymbol):
        out = PolynomialSymbol(dim, {})
        for i in range(dim):
            out = out + f.diff_p(i) * g.diff_q(i) - g.diff_p(i) * f.diff_q(i)
        return out
    if not (f.differentiable and g.differentiable):
        raise ValueError("poisson_bracket needs differentiable symbols")

    def value(*coords):
        p, q = coords[:dim], coords[dim:]
        fp, fq = f.grad_p(p, q), f.grad_q(p, q)
        gp, gq = g.grad_p(p, q), g.grad_q(p, q)
        out = 0.0
        for i in range(dim):
            out = out + fp[i] * gq[i] - gp[i] * fq[i]
        return out

    return CallableSymbol(dim, value, name=f"{{{f!r},{g!r}}}")


class KoopmanGenerator(LinearOperator):
    """Self-adjoint generator X_f: phi -> -i {f, phi} on a fixed grid.

    The symbol gradients are sampled once at construction; field derivatives
    are spectral.
    """

    def __init__(self, symbol: Symbol, grid: PhaseGrid):
        if symbol.dim != grid.dim:
            raise ValueError("symbol/grid dimension mismatch")
        if not (symbol.differentiable or isinstance(symbol, (PolynomialSymbol, SampledSymbol))):
            raise ValueError("generator needs a differentiable symbol")
        self.symbol = symbol
        self.grid = grid
        self._gp, self._gq = symbol.sample_grads(grid)

    def apply(self, phi: PhaseField) -> PhaseField:
        if phi.grid != self.grid:
            raise ValueError("grid mismatch")
        g = self.grid
        out = np.zeros(g.shape, dtype=complex)
        for i in range(g.dim):
            out += self._gp[i] * g.d_dq(phi.values, i)
            out -= self._gq[i] * g.d_dp(phi.values, i)
        return PhaseField(g, -1j * out, phi.role)

    def adjoint(self):
        return self


def apply_generator(generator: KoopmanGenerator, phi: PhaseField) -> PhaseField:
    return generator.apply(phi)


# -- Liouville transport -------------------------------------------------------

def _separable_parts(H: Symbol):
    """(dT/dp_i, dV/dq_i) evaluators when H = T(p) + V(q), else None."""
    if isinstance(H, PolynomialSymbol):
        parts = H.separate()
        if parts is None:
            return None
        T, V = parts
        return (
            tuple(T.diff_p(i) for i in range(H.dim)),
            tuple(V.diff_q(i) for i in range(H.dim)),
        )
    split = getattr(H, "separable_parts", None)
    if callable(split):
        return split()
    return None


def _bracket_rhs(grid, gp, gq, values):
    out = np.zeros(grid.shape, dtype=complex)
    for i in range(grid.dim):
        out += gp[i] * grid.d_dq(values, i)
        out -= gq[i] * grid.d_dp(values, i)
    return -out  # d(phi)/dt = -{H, phi}


def liouville_propagate(
    phi0: PhaseField,
    H: Symbol,
    t_final: float,
    steps: int,
    method: str = "auto",
    sample_every: int | None = None,
):
    """Propagate a phase-space field under the Liouville flow of H.

    Separable Hamiltonians use exact split-step spectral advection (each
    substep is a unitary shear); other smooth Hamiltonians fall back to
    RK4 with spectral derivatives.  Norm drift beyond 1e-4 aborts.

    Returns (final field, samples) where samples is a list of
    (t, PhaseField) collected every `sample_every` steps (always includes
    t=0 and t_final when sampling is requested).
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    grid = phi0.grid
    norm0 = phi0.norm()
    samples = [(0.0, phi0)] if sample_every else None
    if steps == 0 or t_final == 0.0:
        return phi0, (samples or [])

    dt = t_final / steps
    sep = _separable_parts(H) if method in ("auto", "split") else None
    if method == "split" and sep is None:
        raise ValueError("split method needs a separable Hamiltonian")

    values = phi0.values.copy()
    if sep is not None:
        dT, dV = sep
        ps, qs = grid.coords()
        # shift amounts: q_i by dT/dp_i * dt (pure-p array, singleton q axes),
        # p_i by -dV/dq_i * dt (pure-q array, singleton p axes)
        tp = [np.asarray(d.value(ps, qs)) for d in dT]
        vq = [np.asarray(d.value(ps, qs)) for d in dV]

        def half_kinetic(v, tau):
            for i in range(grid.dim):
                v = spectral_shift(v, tp[i] * tau, grid.dq[i], axis=grid.dim + i)
            return v

        def full_potential(v, tau):
            for i in range(grid.dim):
                v = spectral_shift(v, -vq[i] * tau, grid.dp[i], axis=i)
            return v

        for k in range(steps):
            values = half_kinetic(values, dt / 2)
            values = full_potential(values, dt)
            values = half_kinetic(values, dt / 2)
            values, t = _checked(values, grid, norm0, (k + 1) * dt)
            if sample_every and ((k + 1) % sample_every == 0 or k + 1 == steps):
                samples.append((t, PhaseField(grid, values.copy(), phi0.role)))
    else:
        gp, gq = H.sample_grads(grid)

        def rhs(v):
            return _bracket_rhs(grid, gp, gq, v)

        for k in range(steps):
            k1 = rhs(values)
            k2 = rhs(values + 0.5 * dt * k1)
            k3 = rhs(values + 0.5 * dt * k2)
            k4 = rhs(values + dt * k3)
            values = values + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            values, t = _checked(values, grid, norm0, (k + 1) * dt)
            if sample_every and ((k + 1) % sample_every == 0 or k + 1 == steps):
                samples.append((t, PhaseField(grid, values.copy(), phi0.role)))

    return PhaseField(grid, values, phi0.role), (samples or [])


def _checked(values, grid, norm0, t):
    norm = np.sqrt(np.sum(np.abs(values) ** 2).real * grid.cell_volume)
    if abs(norm - norm0) > 1e-4 * max(norm0, 1.0):
        raise RuntimeError(
            f"Liouville integration unstable at t={t:.6g}: norm drift {norm - norm0:.3e}"
        )
    return values, t


# -- classical trajectories ----------------------------------------------------

@dataclass
class ClassicalTrajectory:
    """Sampled Hamiltonian trajectory with integrator metadata."""

    t: np.ndarray
    p: np.ndarray  # (n_samples, dim)
    q: np.ndarray
    method: str
    step: float
    hamiltonian: Symbol = field(repr=False, default=None)

    def energy(self) -> np.ndarray:
        H = self.hamiltonian
        return np.array(
            [H.value(tuple(self.p[k]), tuple(self.q[k])) for k in range(len(self.t))]
        )


def classical_flow(H: Symbol, p0, q0, t_final: float, step: float) -> ClassicalTrajectory:
    """Integrate Hamilton's equations dq/dt = grad_p H, dp/dt = -grad_q H.

    Separable H gets Stoermer-Verlet (kick-drift-kick), everything else RK4.
    The sampled trajectory is the Liouville characteristics oracle.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    dim = H.dim
    p = np.atleast_1d(np.asarray(p0, dtype=float)).copy()
    q = np.atleast_1d(np.asarray(q0, dtype=float)).copy()
    if p.shape != (dim,) or q.shape != (dim,):
        raise ValueError("initial condition has wrong dimension")
    n = max(1, int(round(t_final / step)))
    dt = t_final / n
    ts = np.linspace(0.0, t_final, n + 1)
    ps = np.empty((n + 1, dim))
    qs = np.empty((n + 1, dim))
    ps[0], qs[0] = p, q

    sep = _separable_parts(H)
    if sep is not None:
        dT, dV = sep
        zero = tuple(np.zeros(1))  # dummy slot for the coordinate the part ignores

        def dTval(pv):
            return np.array([float(np.asarray(d.value(tuple(pv), zero * dim)).ravel()[0]) for d in dT])

        def dVval(qv):
            return np.array([float(np.asarray(d.value(zero * dim, tuple(qv))).ravel()[0]) for d in dV])

        for k in range(n):
            p = p - 0.5 * dt * dVval(q)
            q = q + dt * dTval(p)
            p = p - 0.5 * dt * dVval(q)
            ps[k + 1], qs[k + 1] = p, q
        method = "leapfrog"
    else:

        def rhs(state):
            pv, qv = state[:dim], state[dim:]
            gp = np.asarray(H.grad_p(tuple(pv), tuple(qv)), dtype=float)
            gq = np.asarray(H.grad_q(tuple(pv), tuple(qv)), dtype=float)
            return np.concatenate([-gq, gp])

        y = np.concatenate([p, q])
        for k in range(n):
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * dt * k1)
            k3 = rhs(y + 0.5 * dt * k2)
            k4 = rhs(y + dt * k3)
            y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            ps[k + 1], qs[k + 1] = y[:dim], y[dim:]
        method = "rk4"

    return ClassicalTrajectory(ts, ps, qs, method, dt, H)
