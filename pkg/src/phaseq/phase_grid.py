"""Discretized phase space: grids, complex fields, observables, densities.

Phase space is truncated to a periodic box.  A field over a `dim`-dimensional
configuration space lives on a (2*dim)-dimensional array whose leading `dim`
axes are momentum axes and trailing `dim` axes are position axes.  All
quadrature is the plain Riemann sum on the uniform grid, which is spectrally
accurate for smooth fields that decay below ~1e-12 at the box edge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import spectral_derivative

__all__ = [
    "PhaseGrid",
    "PhaseField",
    "Symbol",
    "PolynomialSymbol",
    "CallableSymbol",
    "SampledSymbol",
    "DensityModel",
    "LinearOperator",
    "DiagonalOperator",
    "make_grid",
    "event_projector",
    "expectation",
    "collapse",
    "density_from_state",
    "symplectic_compatible_grid",
    "p_symbol",
    "q_symbol",
    "constant_symbol",
    "kinetic_symbol",
    "harmonic_symbol",
    "quartic_symbol",
    "angular_symbol_z",
]


def _as_extents(extent, dim):
    """Normalize an extent spec to a tuple of per-axis (lo, hi) pairs."""
    extent = tuple(extent)
    if len(extent) == 2 and np.isscalar(extent[0]):
        pairs = (tuple(float(v) for v in extent),) * dim
    else:
        pairs = tuple(tuple(float(v) for v in pair) for pair in extent)
    if len(pairs) != dim:
        raise ValueError(f"expected {dim} extent pairs, got {len(pairs)}")
    for lo, hi in pairs:
        if not hi > lo:
            raise ValueError(f"empty extent [{lo}, {hi})")
    return pairs


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform periodic (p, q) grid with spectral frequency axes."""

    dim: int
    p_extent: tuple
    q_extent: tuple
    n_p: int
    n_q: int
    hbar: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")
        for n, label in ((self.n_p, "n_p"), (self.n_q, "n_q")):
            if n < 8 or n % 2:
                raise ValueError(f"odd grid count or too few points: {label}={n}")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "p_extent", _as_extents(self.p_extent, self.dim))
        object.__setattr__(self, "q_extent", _as_extents(self.q_extent, self.dim))

    # -- per-axis geometry -------------------------------------------------
    @property
    def dp(self):
        return tuple((hi - lo) / self.n_p for lo, hi in self.p_extent)

    @property
    def dq(self):
        return tuple((hi - lo) / self.n_q for lo, hi in self.q_extent)

    def p_axis(self, i=0):
        lo, hi = self.p_extent[i]
        return lo + np.arange(self.n_p) * (hi - lo) / self.n_p

    def q_axis(self, i=0):
        lo, hi = self.q_extent[i]
        return lo + np.arange(self.n_q) * (hi - lo) / self.n_q

    @property
    def shape(self):
        return (self.n_p,) * self.dim + (self.n_q,) * self.dim

    @property
    def cell_volume(self):
        return math.prod(self.dp) * math.prod(self.dq)

    @property
    def total_volume(self):
        return self.cell_volume * self.n_p**self.dim * self.n_q**self.dim

    # -- broadcastable coordinate arrays ------------------------------------
    def p_broadcast(self, i=0):
        shape = [1] * (2 * self.dim)
        shape[i] = self.n_p
        return self.p_axis(i).reshape(shape)

    def q_broadcast(self, i=0):
        shape = [1] * (2 * self.dim)
        shape[self.dim + i] = self.n_q
        return self.q_axis(i).reshape(shape)

    def coords(self):
        """(p_arrays, q_arrays): tuples of broadcastable coordinate arrays."""
        ps = tuple(self.p_broadcast(i) for i in range(self.dim))
        qs = tuple(self.q_broadcast(i) for i in range(self.dim))
        return ps, qs

    # -- spectral derivatives on fields --------------------------------------
    def d_dp(self, values, i=0):
        return spectral_derivative(values, self.dp[i], axis=i)

    def d_dq(self, values, i=0):
        return spectral_derivative(values, self.dq[i], axis=self.dim + i)

    def is_symmetric(self, tol=1e-12):
        """True when every axis is centered: extent [-L/2, L/2)."""
        for lo, hi in self.p_extent + self.q_extent:
            if abs(lo + hi) > tol * max(1.0, abs(hi)):
                return False
        return True


def make_grid(dim, p_extent, q_extent, n_p, n_q, hbar=1.0) -> PhaseGrid:
    """Build a phase-space grid; rejects odd counts, empty extents, hbar <= 0."""
    return PhaseGrid(dim, p_extent, q_extent, int(n_p), int(n_q), float(hbar))


def symplectic_compatible_grid(dim, n, hbar=1.0, alpha=0.5) -> PhaseGrid:
    """Square centered grid on which K_S(alpha) maps the grid onto itself.

    The FFT realization of the symplectic transform is grid-exact iff
    alpha * dp * dq * n = 2*pi*hbar per axis; this chooses dp = dq.
    """
    h = 2.0 * np.pi * hbar
    d = math.sqrt(h / (alpha * n))
    half = n * d / 2.0
    return PhaseGrid(dim, (-half, half), (-half, half), n, n, hbar)


@dataclass
class PhaseField:
    """Complex field over a PhaseGrid; role is "state" or "symbol"."""

    grid: PhaseGrid
    values: np.ndarray
    role: str = "state"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"field shape {self.values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")
        if self.role == "symbol":
            if np.abs(self.values.imag).max(initial=0.0) > 1e-12:
                raise ValueError("symbol field must be real")

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2).real * self.grid.cell_volume)

    def inner(self, other: "PhaseField") -> complex:
        if other.grid is not self.grid and other.grid != self.grid:
            raise ValueError("grid mismatch")
        return complex(np.vdot(self.values, other.values) * self.grid.cell_volume)

    def normalized(self) -> "PhaseField":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero field")
        return PhaseField(self.grid, self.values / n, self.role)

    def check_normalized(self, tol=1e-10):
        if abs(self.norm_squared() - 1.0) > tol:
            raise ValueError(f"state not normalized: |phi|^2 = {self.norm_squared()!r}")


class Symbol:
    """A real classical observable f(p, q); subclasses supply gradients."""

    def __init__(self, dim: int):
        self.dim = int(dim)

    def value(self, p, q):
        raise NotImplementedError

    def grad_p(self, p, q):
        return None

    def grad_q(self, p, q):
        return None

    @property
    def differentiable(self) -> bool:
        return True

    def sample(self, grid: PhaseGrid) -> np.ndarray:
        ps, qs = grid.coords()
        return np.broadcast_to(self.value(ps, qs), grid.shape).astype(float)

    def sample_grads(self, grid: PhaseGrid):
        ps, qs = grid.coords()
        gp, gq = self.grad_p(ps, qs), self.grad_q(ps, qs)
        if gp is None or gq is None:
            raise ValueError(f"symbol {self!r} has no gradients")
        return gp, gq

    def check_gradients(self, points_p, points_q, step=1e-5, tol=5e-7):
        """Spot-check analytic gradients against centered differences."""
        pts_p = [np.asarray(a, dtype=float) for a in points_p]
        pts_q = [np.asarray(a, dtype=float) for a in points_q]
        gp, gq = self.grad_p(pts_p, pts_q), self.grad_q(pts_p, pts_q)
        for i in range(self.dim):
            for grads, pts, other in ((gp, pts_p, pts_q), (gq, pts_q, pts_p)):
                hi = [a.copy() for a in pts]
                lo = [a.copy() for a in pts]
                hi[i] = hi[i] + step
                lo[i] = lo[i] - step
                if grads is gp:
                    fd = (self.value(hi, other) - self.value(lo, other)) / (2 * step)
                else:
                    fd = (self.value(other, hi) - self.value(other, lo)) / (2 * step)
                err = np.max(np.abs(np.asarray(grads[i], dtype=float) - fd))
                if err > tol * max(1.0, np.max(np.abs(fd))):
                    raise AssertionError(f"gradient check failed on axis {i}: err={err}")
        return True


def _astuple(x, dim):
    if isinstance(x, (tuple, list)):
        return tuple(x)
    if dim != 1:
        raise ValueError("multi-dimensional symbols need coordinate tuples")
    return (x,)


class PolynomialSymbol(Symbol):
    """Polynomial in (p_1..p_d, q_1..q_d) as {(p_exps, q_exps): coeff}.

    Closed under differentiation and products, so Poisson brackets of
    polynomial symbols stay exact.
    """

    def __init__(self, dim: int, terms: dict):
        super().__init__(dim)
        clean = {}
        for (pe, qe), c in terms.items():
            pe, qe = tuple(int(e) for e in pe), tuple(int(e) for e in qe)
            if len(pe) != dim or len(qe) != dim:
                raise ValueError("exponent tuples must have length dim")
            if c != 0.0:
                clean[(pe, qe)] = clean.get((pe, qe), 0.0) + float(c)
        self.terms = {k: v for k, v in clean.items() if v != 0.0}

    def value(self, p, q):
        p, q = _astuple(p, self.dim), _astuple(q, self.dim)
        out = 0.0
        for (pe, qe), c in self.terms.items():
            term = c
            for i in range(self.dim):
                if pe[i]:
                    term = term * np.asarray(p[i]) ** pe[i]
                if qe[i]:
                    term = term * np.asarray(q[i]) ** qe[i]
            out = out + term
        return out

    def _diff(self, which: str, axis: int) -> "PolynomialSymbol":
        terms = {}
        for (pe, qe), c in self.terms.items():
            exps = pe if which == "p" else qe
            if exps[axis] == 0:
                continue
            new = list(exps)
            new[axis] -= 1
            key = (tuple(new), qe) if which == "p" else (pe, tuple(new))
            terms[key] = terms.get(key, 0.0) + c * exps[axis]
        return PolynomialSymbol(self.dim, terms)

    def diff_p(self, axis=0):
        return self._diff("p", axis)

    def diff_q(self, axis=0):
        return self._diff("q", axis)

    def grad_p(self, p, q):
        p, q = _astuple(p, self.dim), _astuple(q, self.dim)
        return tuple(self.diff_p(i).value(p, q) for i in range(self.dim))

    def grad_q(self, p, q):
        p, q = _astuple(p, self.dim), _astuple(q, self.dim)
        return tuple(self.diff_q(i).value(p, q) for i in range(self.dim))

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = constant_symbol(self.dim, other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0.0) + v
        return PolynomialSymbol(self.dim, terms)

    def __sub__(self, other):
        return self + (other * -1.0 if isinstance(other, PolynomialSymbol) else -other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return PolynomialSymbol(self.dim, {k: v * other for k, v in self.terms.items()})
        terms = {}
        for (pe1, qe1), c1 in self.terms.items():
            for (pe2, qe2), c2 in other.terms.items():
                pe = tuple(a + b for a, b in zip(pe1, pe2))
                qe = tuple(a + b for a, b in zip(qe1, qe2))
                terms[(pe, qe)] = terms.get((pe, qe), 0.0) + c1 * c2
        return PolynomialSymbol(self.dim, terms)

    __rmul__ = __mul__

    def degree_p(self):
        return max((sum(pe) for (pe, _) in self.terms), default=0)

    def separate(self):
        """Split into (T(p), V(q)) if every monomial is pure-p or pure-q."""
        tp, vq = {}, {}
        for (pe, qe), c in self.terms.items():
            if all(e == 0 for e in qe):
                tp[(pe, qe)] = c
            elif all(e == 0 for e in pe):
                vq[(pe, qe)] = c
            else:
                return None
        return PolynomialSymbol(self.dim, tp), PolynomialSymbol(self.dim, vq)

    def __repr__(self):
        return f"PolynomialSymbol(dim={self.dim}, terms={self.terms})"


class CallableSymbol(Symbol):
    """Observable given by callables; gradients optional."""

    def __init__(self, dim, fn, grad_p=None, grad_q=None, name="callable"):
        super().__init__(dim)
        self._fn, self._gp, self._gq = fn, grad_p, grad_q
        self.name = name

    def value(self, p, q):
        return self._fn(*_astuple(p, self.dim), *_astuple(q, self.dim))

    @property
    def differentiable(self):
        return self._gp is not None and self._gq is not None

    def grad_p(self, p, q):
        if self._gp is None:
            return None
        return tuple(self._gp(*_astuple(p, self.dim), *_astuple(q, self.dim)))

    def grad_q(self, p, q):
        if self._gq is None:
            return None
        return tuple(self._gq(*_astuple(p, self.dim), *_astuple(q, self.dim)))

    def __repr__(self):
        return f"CallableSymbol({self.name!r})"


class _PartGradient:
    """Adapter giving one component of a separable part the Symbol.value shape."""

    def __init__(self, fn, which: str, dim: int):
        self._fn = fn
        self._which = which
        self._dim = dim

    def value(self, p, q):
        coords = _astuple(p if self._which == "p" else q, self._dim)
        return self._fn(*coords)


class SeparableSymbol(Symbol):
    """H = T(p) + V(q) given as callables with their per-axis derivatives.

    Enables exact split-step Liouville advection and leapfrog trajectories
    for non-polynomial potentials.
    """

    def __init__(self, dim, t_fn, dt_fns, v_fn, dv_fns, name="separable"):
        super().__init__(dim)
        dt_fns, dv_fns = tuple(dt_fns), tuple(dv_fns)
        if len(dt_fns) != dim or len(dv_fns) != dim:
            raise ValueError("need one derivative callable per axis")
        self._t, self._v = t_fn, v_fn
        self._dt, self._dv = dt_fns, dv_fns
        self.name = name

    def value(self, p, q):
        p, q = _astuple(p, self.dim), _astuple(q, self.dim)
        return self._t(*p) + self._v(*q)

    def grad_p(self, p, q):
        p = _astuple(p, self.dim)
        return tuple(f(*p) for f in self._dt)

    def grad_q(self, p, q):
        q = _astuple(q, self.dim)
        return tuple(f(*q) for f in self._dv)

    def separable_parts(self):
        dT = tuple(_PartGradient(f, "p", self.dim) for f in self._dt)
        dV = tuple(_PartGradient(f, "q", self.dim) for f in self._dv)
        return dT, dV

    def __repr__(self):
        return f"SeparableSymbol({self.name!r})"


class SampledSymbol(Symbol):
    """Observable known only through its samples on a grid.

    Gradients come from spectral differentiation, so the sampled field must
    be smooth and effectively periodic on the box.
    """

    def __init__(self, phase_field: PhaseField):
        if phase_field.role != "symbol":
            raise ValueError("sampled symbols must come from role='symbol' fields")
        super().__init__(phase_field.grid.dim)
        self.field = phase_field

    def value(self, p, q):  # only grid-aligned evaluation is supported
        raise ValueError("sampled symbols can only be sampled on their own grid")

    def sample(self, grid):
        if grid != self.field.grid:
            raise ValueError("sampled symbol asked on a foreign grid")
        return self.field.values.real.copy()

    def sample_grads(self, grid):
        if grid != self.field.grid:
            raise ValueError("sampled symbol asked on a foreign grid")
        v = self.field.values.real
        gp = tuple(grid.d_dp(v, i).real for i in range(grid.dim))
        gq = tuple(grid.d_dq(v, i).real for i in range(grid.dim))
        return gp, gq


# -- convenience constructors ----------------------------------------------

def constant_symbol(dim, c):
    return PolynomialSymbol(dim, {((0,) * dim, (0,) * dim): c})


def p_symbol(dim=1, axis=0):
    pe = [0] * dim
    pe[axis] = 1
    return PolynomialSymbol(dim, {(tuple(pe), (0,) * dim): 1.0})


def q_symbol(dim=1, axis=0):
    qe = [0] * dim
    qe[axis] = 1
    return PolynomialSymbol(dim, {((0,) * dim, tuple(qe)): 1.0})


def kinetic_symbol(mass=1.0, dim=1):
    terms = {}
    for i in range(dim):
        pe = [0] * dim
        pe[i] = 2
        terms[(tuple(pe), (0,) * dim)] = 0.5 / mass
    return PolynomialSymbol(dim, terms)


def harmonic_symbol(mass=1.0, omega=1.0, dim=1):
    out = kinetic_symbol(mass, dim)
    for i in range(dim):
        qe = [0] * dim
        qe[i] = 2
        out = out + PolynomialSymbol(dim, {((0,) * dim, tuple(qe)): 0.5 * mass * omega**2})
    return out


def quartic_symbol(coeff=0.25, mass=1.0, dim=1):
    out = kinetic_symbol(mass, dim)
    for i in range(dim):
        qe = [0] * dim
        qe[i] = 4
        out = out + PolynomialSymbol(dim, {((0,) * dim, tuple(qe)): coeff})
    return out


def angular_symbol_z(dim=2):
    """(q ^ p)_z = q_x p_y - q_y p_x."""
    if dim < 2:
        raise ValueError("angular momentum needs dim >= 2")
    z = (0,) * dim

    def unit(vec, axis):
        out = list(vec)
        out[axis] = 1
        return tuple(out)

    return PolynomialSymbol(
        dim,
        {
            (unit(z, 1), unit(z, 0)): 1.0,   # q_x p_y
            (unit(z, 0), unit(z, 1)): -1.0,  # -q_y p_x
        },
    )


# -- operators ---------------------------------------------------------------

class LinearOperator:
    """Minimal composable operator on phase-space fields."""

    def apply(self, field: PhaseField) -> PhaseField:
        raise NotImplementedError

    def adjoint(self) -> "LinearOperator":
        raise NotImplementedError

    def __call__(self, field):
        return self.apply(field)


class DiagonalOperator(LinearOperator):
    """Pointwise multiplication by a fixed (real or complex) array."""

    def __init__(self, grid: PhaseGrid, multiplier: np.ndarray):
        self.grid = grid
        self.multiplier = np.asarray(multiplier)
        if self.multiplier.shape != grid.shape:
            self.multiplier = np.broadcast_to(self.multiplier, grid.shape)

    def apply(self, field: PhaseField) -> PhaseField:
        if field.grid != self.grid:
            raise ValueError("grid mismatch")
        return PhaseField(self.grid, self.multiplier * field.values, field.role)

    def adjoint(self):
        return DiagonalOperator(self.grid, np.conj(self.multiplier))


def event_projector(grid: PhaseGrid, region) -> DiagonalOperator:
    """Projector multiplying by the indicator of a phase-space region.

    `region` is a boolean function of broadcastable coordinate tuples
    (p_arrays, q_arrays); the empty region gives the zero operator.
    """
    ps, qs = grid.coords()
    mask = np.broadcast_to(np.asarray(region(ps, qs), dtype=bool), grid.shape)
    return DiagonalOperator(grid, mask.astype(float))


# -- densities ----------------------------------------------------------------

@dataclass
class DensityModel:
    """Convex mixture of normalized states standing in for a density operator."""

    components: list = field(default_factory=list)

    def __post_init__(self):
        if not self.components:
            raise ValueError("density needs at least one component")
        total = 0.0
        for w, state in self.components:
            if w < 0:
                raise ValueError("negative mixture weight")
            state.check_normalized()
            total += w
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total!r}, not 1")

    @property
    def grid(self) -> PhaseGrid:
        return self.components[0][1].grid

    def rho(self) -> np.ndarray:
        """Diagonal density rho(p, q) = sum_i w_i |phi_i|^2."""
        out = np.zeros(self.grid.shape)
        for w, state in self.components:
            out += w * np.abs(state.values) ** 2
        return out

    @staticmethod
    def pure(state: PhaseField) -> "DensityModel":
        return DensityModel([(1.0, state)])


def density_from_state(state: PhaseField) -> PhaseField:
    """rho = |phi|^2 as a real symbol field; phases of phi are irrelevant."""
    state.check_normalized()
    return PhaseField(state.grid, np.abs(state.values) ** 2, role="symbol")


def expectation(density: DensityModel, observable) -> float:
    """Tr(D f) = sum_i w_i * sum_cells f |phi_i|^2 * cellvol.

    `observable` may be a Symbol, a sampled real array, or a PhaseField with
    role "symbol".
    """
    grid = density.grid
    if isinstance(observable, Symbol):
        f = observable.sample(grid)
    elif isinstance(observable, PhaseField):
        f = observable.values.real
    else:
        f = np.asarray(observable, dtype=float)
    rho = density.rho()
    if not np.all(np.isfinite(f[rho > 1e-300])):
        raise ValueError("symbol is not finite on the support of the density")
    return float(np.sum(f * rho) * grid.cell_volume)


def collapse(density: DensityModel, region) -> DensityModel:
    """Condition a density on a phase-space event (Bayes on the diagonal)."""
    grid = density.grid
    mask = event_projector(grid, region).multiplier
    new = []
    total = 0.0
    for w, state in density.components:
        cut = mask * state.values
        mass = float(np.sum(np.abs(cut) ** 2) * grid.cell_volume)
        if w * mass > 0.0:
            new.append((w * mass, PhaseField(grid, cut / math.sqrt(mass))))
            total += w * mass
    if total <= 0.0:
        raise ValueError("conditioning on null event")
    return DensityModel([(w / total, s) for w, s in new])
