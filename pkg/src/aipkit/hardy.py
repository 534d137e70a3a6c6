"""Discrete Hardy-space machinery on the unit circle.

Functions on the circle are sampled on the ``N``-th roots of unity.  The
FFT gives Fourier coefficients for frequencies in ``[-N/2, N/2)``; the
Riesz projections keep the nonnegative or the negative half of that band.

On top of this sit the model spaces ``H(b) = H^2 (-) b H^2`` and
``H_*(b) = (H^2)^perp (-) b^* (H^2)^perp`` of a Blaschke-Potapov product,
the operators ``X_r``, ``X_l``, ``Gamma_r``, ``Gamma_l`` and the indefinite
inner product of the de Branges-Rovnyak space ``D(s)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (DomainError, InvalidInput, KLConsistencyError, NumericalRankFailure,
                     UnsupportedPoleStructure)
from .ratfun import (RANK_TOL, BlaschkePotapovProduct, RationalMatrixFunction,
                     bp_degree, delta_matrix, krein_langer_left,
                     krein_langer_right)

LOGGER = logging.getLogger(__name__)

DEFAULT_GRID = 1024
NULL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class CircleGrid:
    N: int = DEFAULT_GRID

    def __post_init__(self):
        if self.N < 8 or self.N & (self.N - 1):
            raise InvalidInput(f"grid size must be a power of two >= 8, got {self.N}")

    @property
    def nodes(self):
        return np.exp(2j * np.pi * np.arange(self.N) / self.N)

    @property
    def frequencies(self):
        return np.fft.fftfreq(self.N, d=1.0 / self.N).astype(int)

    def coefficients(self, values):
        """Fourier coefficients along axis 0 (in FFT order)."""
        return np.fft.fft(values, axis=0) / self.N

    def synthesize(self, coeffs):
        return np.fft.ifft(coeffs, axis=0) * self.N


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """``C^m``-valued samples on a :class:`CircleGrid`.

    ``split`` is the size of the upper block when the function stands for
    an element ``[f_+; f_-]`` of ``D(s)``.
    """

    grid: CircleGrid
    values: np.ndarray
    split: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.N:
            raise InvalidInput(f"{v.shape[0]} samples on a grid of size {self.grid.N}")
        if self.split is not None and not 0 <= self.split <= v.shape[1]:
            raise InvalidInput("split exceeds the number of components")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid, fn, split=None):
        """Sample ``fn`` (array of nodes -> array ``(K, m)``) on the grid."""
        return cls(grid, np.asarray(fn(grid.nodes), dtype=complex), split)

    @property
    def m(self):
        return self.values.shape[1]

    @property
    def upper(self):
        return BoundaryFunction(self.grid, self.values[:, : self.split])

    @property
    def lower(self):
        return BoundaryFunction(self.grid, self.values[:, self.split:])

    def norm(self):
        return float(np.sqrt(np.mean(np.sum(np.abs(self.values) ** 2, axis=1))))

    def inner(self, other):
        """L^2 inner product ``<self, other>`` (linear in ``self``)."""
        return complex(np.mean(np.sum(other.values.conj() * self.values, axis=1)))

    def __add__(self, other):
        return BoundaryFunction(self.grid, self.values + other.values, self.split)

    def __sub__(self, other):
        return BoundaryFunction(self.grid, self.values - other.values, self.split)

    def __mul__(self, c):
        return BoundaryFunction(self.grid, self.values * c, self.split)

    __rmul__ = __mul__


def project_plus(f):
    c = f.grid.coefficients(f.values)
    c[f.grid.frequencies < 0] = 0
    return BoundaryFunction(f.grid, f.grid.synthesize(c), f.split)


def project_minus(f):
    c = f.grid.coefficients(f.values)
    c[f.grid.frequencies >= 0] = 0
    return BoundaryFunction(f.grid, f.grid.synthesize(c), f.split)


def multiply(values, f):
    """Pointwise ``A(t_k) f(t_k)`` for a stack of matrices ``values``."""
    return BoundaryFunction(f.grid, np.einsum("kij,kj->ki", values, f.values))


# ---------------------------------------------------------------------------
# model spaces


@dataclass(frozen=True, eq=False)
class ModelSpaceBasis:
    side: str
    basis: tuple
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def dimension(self):
        return len(self.basis)

    def matrix(self):
        """Samples stacked as ``(N, m, dim)``."""
        if not self.basis:
            return None
        return np.stack([e.values for e in self.basis], axis=-1)

    def coordinates(self, f):
        """``<f, e_i>`` for every basis element."""
        return np.array([f.inner(e) for e in self.basis], dtype=complex)

    def combine(self, coords, grid, m):
        out = np.zeros((grid.N, m), dtype=complex)
        for c, e in zip(coords, self.basis):
            out += c * e.values
        return BoundaryFunction(grid, out)

    def projection(self, f):
        return self.combine(self.coordinates(f), f.grid, f.m)


def _truncation(b, N):
    rmax = max([abs(a) for a in b.zeros], default=0.0)
    if rmax < 1e-3:
        L = 8
    else:
        L = int(np.ceil(np.log(1e-15) / np.log(rmax))) + 8
    return max(8, min(L, N // 2))


def model_space_basis(b, side, grid=None):
    """Orthonormal basis of ``H(b)`` (``side='analytic'``) or ``H_*(b)``.

    The elements are the numerical null space of the compressed block
    Toeplitz operator ``c -> Pi_+(b^* f)`` on polynomials of degree < L
    (resp. ``c -> Pi_-(b g)`` on spans of ``t^{-1}, ..., t^{-L}``).
    """
    if side not in ("analytic", "coanalytic"):
        raise InvalidInput(f"unknown side {side!r}")
    grid = grid or CircleGrid()
    zeros = b.zeros
    for i, a in enumerate(zeros):
        if any(abs(a - z) <= 1e-10 for z in zeros[:i]):
            raise UnsupportedPoleStructure(f"repeated zero {a!r} in the Blaschke-Potapov product")
    m = b.dim
    degree = bp_degree(b)
    if degree == 0:
        return ModelSpaceBasis(side, ())
    L = _truncation(b, grid.N)
    beta = grid.coefficients(b.evaluate_many(grid.nodes))
    freqs = grid.frequencies
    coef = np.zeros((L, m, m), dtype=complex)
    for j in range(L):
        coef[j] = beta[freqs == j][0]
    A = np.zeros((L * m, L * m), dtype=complex)
    for k in range(L):
        for n in range(k, L):
            blk = coef[n - k].conj().T if side == "analytic" else coef[n - k]
            A[k * m:(k + 1) * m, n * m:(n + 1) * m] = blk
    _, sv, Vh = np.linalg.svd(A)
    null = int(np.sum(sv <= NULL_TOL * max(1.0, sv[0])))
    if null != degree:
        raise NumericalRankFailure(
            f"model space has numerical dimension {null}, expected degree {degree}")
    Z = Vh[-null:].conj().T
    basis = []
    for col in Z.T:
        c = col.reshape(L, m)
        k = int(np.argmax(np.abs(col)))
        c = c * (abs(col[k]) / col[k])
        full = np.zeros((grid.N, m), dtype=complex)
        if side == "analytic":
            full[:L] = c
        else:
            full[-L:] = c[::-1]
        basis.append(BoundaryFunction(grid, grid.synthesize(full)))
    return ModelSpaceBasis(side, tuple(basis), sv[-null - 1:] if null < len(sv) else sv)


def closed_form_residual(basis, b):
    """Distance of the rational elements ``1/(1 - conj(a) t)`` (or
    ``conj(t)/(1 - a conj(t))``) from the computed scalar model space."""
    if b.dim != 1:
        raise InvalidInput("closed-form cross-check is for scalar products only")
    grid = basis.basis[0].grid if basis.basis else CircleGrid()
    t = grid.nodes
    worst = 0.0
    for a in b.zeros:
        if basis.side == "analytic":
            v = 1 / (1 - np.conj(a) * t)
        else:
            v = np.conj(t) / (1 - a * np.conj(t))
        f = BoundaryFunction(grid, v)
        r = (f - basis.projection(f)).norm() / f.norm()
        worst = max(worst, r)
    return worst


# ---------------------------------------------------------------------------
# X and Gamma operators


@dataclass(frozen=True, eq=False)
class FiniteRankMap:
    """``f -> sum_j (matrix @ <f, source_i>)_j target_j``."""

    source: ModelSpaceBasis
    target: ModelSpaceBasis
    matrix: np.ndarray
    out_dim: int

    def apply(self, f):
        if self.source.dimension == 0:
            return BoundaryFunction(f.grid, np.zeros((f.grid.N, self.out_dim), dtype=complex))
        return self.target.combine(self.matrix @ self.source.coordinates(f), f.grid, self.out_dim)

    @property
    def rank(self):
        if self.matrix.size == 0:
            return 0
        return int(np.linalg.matrix_rank(self.matrix))


def _s_grid(s, grid):
    if isinstance(s, RationalMatrixFunction):
        return s.evaluate_many(grid.nodes)
    vals, ok = [], []
    for t in grid.nodes:
        try:
            v = np.atleast_2d(s(t))
        except DomainError:
            v = None
        vals.append(v)
        ok.append(v is not None and bool(np.all(np.isfinite(v))))
    shape = next(v.shape for v in vals if v is not None)
    vals = np.stack([v if v is not None else np.full(shape, np.nan) for v in vals])
    return vals, np.array(ok)


def _x_matrix(s_vals, source, target, op):
    k = source.dimension
    if k == 0:
        return np.zeros((0, 0), dtype=complex), 0.0
    X = np.zeros((target.dimension, k), dtype=complex)
    leak = 0.0
    for j, e in enumerate(source.basis):
        g = op(multiply(s_vals, e))
        X[:, j] = target.coordinates(g)
        leak = max(leak, (g - target.combine(X[:, j], g.grid, g.m)).norm())
    return X, leak


def build_Xr(s_vals, basis_r, basis_l):
    """Matrix of ``h -> Pi_-(s h)`` from ``H(b_r)`` to ``H_*(b_l)`` coordinates.

    Also returns how far the images stick out of ``H_*(b_l)``.
    """
    if basis_r.dimension != basis_l.dimension:
        raise KLConsistencyError(
            f"dim H(b_r) = {basis_r.dimension} but dim H_*(b_l) = {basis_l.dimension}")
    return _x_matrix(s_vals, basis_r, basis_l, project_minus)


def build_Xl(s_vals, basis_r, basis_l):
    """Matrix of ``h -> Pi_+(s^* h)`` from ``H_*(b_l)`` to ``H(b_r)`` coordinates."""
    if basis_r.dimension != basis_l.dimension:
        raise KLConsistencyError("model spaces of different dimension")
    s_adj = np.conj(np.swapaxes(s_vals, 1, 2))
    return _x_matrix(s_adj, basis_l, basis_r, project_plus)


def _checked_inverse(X, rank_tol):
    if X.size == 0:
        return X, 1.0
    sv = np.linalg.svd(X, compute_uv=False)
    if sv[-1] <= rank_tol * max(1.0, sv[0]):
        raise KLConsistencyError("X operator is singular; factorizations are inconsistent")
    return np.linalg.inv(X), float(sv[0] / sv[-1])


def build_gamma_r(Xr, basis_r, basis_l, q, rank_tol=RANK_TOL):
    """``Gamma_r = X_r^{-1} P_{H_*(b_l)}`` as a map ``L^2_p -> H(b_r)``."""
    Xi, _ = _checked_inverse(Xr, rank_tol)
    return FiniteRankMap(basis_l, basis_r, Xi, q)


def build_gamma_l(Xl, basis_r, basis_l, p, rank_tol=RANK_TOL):
    """``Gamma_l = X_l^{-1} P_{H(b_r)}`` as a map ``L^2_q -> H_*(b_l)``."""
    Xi, _ = _checked_inverse(Xl, rank_tol)
    return FiniteRankMap(basis_r, basis_l, Xi, p)


# ---------------------------------------------------------------------------
# the space D(s)


class MembershipResult(tuple):
    __slots__ = ()

    def __new__(cls, ok, residuals):
        return super().__new__(cls, (ok, residuals))

    @property
    def ok(self):
        return self[0]

    @property
    def residuals(self):
        return self[1]


class DBRSpace:
    """The de Branges-Rovnyak space ``D(s)`` discretized on a circle grid.

    Parameters
    ----------
    s : RationalMatrixFunction or callable
        A generalized Schur function.  Callables are taken to be in the
        classical Schur class (no Krein-Langer data needed).
    grid : CircleGrid, optional
    rank_tol : float
        Relative rank cut for pseudoinverses and range tests.
    """

    def __init__(self, s, grid=None, rank_tol=RANK_TOL, seed=0, kl_left=None, kl_right=None):
        self.s = s
        self.grid = grid or CircleGrid()
        self.rank_tol = rank_tol
        vals, ok = _s_grid(s, self.grid)
        self.p, self.q = vals.shape[1:]
        self.ok = ok
        self.skipped = int(np.sum(~ok))
        if self.skipped:
            LOGGER.warning("%d grid nodes skipped at boundary poles", self.skipped)
        self.s_vals = np.where(ok[:, None, None], vals, 0)
        deltas = np.stack([delta_matrix(v) for v in self.s_vals])
        self.deltas = deltas
        self.delta_pinvs = np.linalg.pinv(deltas, rcond=rank_tol, hermitian=True)

        if isinstance(s, RationalMatrixFunction) and s.disk_poles().size:
            kl_left = kl_left or krein_langer_left(s, seed=seed)
            kl_right = kl_right or krein_langer_right(s, seed=seed)
            self.b_l = kl_left.blaschke_part
            self.b_r = kl_right.blaschke_part
        else:
            self.b_l = BlaschkePotapovProduct.identity(self.p)
            self.b_r = BlaschkePotapovProduct.identity(self.q)
        self.kappa = bp_degree(self.b_l)
        if bp_degree(self.b_r) != self.kappa:
            raise KLConsistencyError("left and right Blaschke-Potapov degrees differ")
        self.basis_r = model_space_basis(self.b_r, "analytic", self.grid)
        self.basis_l = model_space_basis(self.b_l, "coanalytic", self.grid)
        self.Xr, self.xr_leak = build_Xr(self.s_vals, self.basis_r, self.basis_l)
        self.Xl, self.xl_leak = build_Xl(self.s_vals, self.basis_r, self.basis_l)
        self.gamma_r = build_gamma_r(self.Xr, self.basis_r, self.basis_l, self.q, rank_tol)
        self.gamma_l = build_gamma_l(self.Xl, self.basis_r, self.basis_l, self.p, rank_tol)
        _, self.xr_condition = _checked_inverse(self.Xr, rank_tol)

    @property
    def quadrature_degraded(self):
        return self.skipped > 0

    def boundary_function(self, fn):
        return BoundaryFunction.from_callable(self.grid, fn, self.p)

    def _split(self, f):
        if f.m != self.p + self.q:
            raise InvalidInput(f"element has {f.m} components, expected {self.p + self.q}")
        up = BoundaryFunction(self.grid, f.values[:, : self.p])
        lo = BoundaryFunction(self.grid, f.values[:, self.p:])
        return up, lo

    def inner(self, f, g):
        """``[f, g]_{D(s)}``, linear in ``f``."""
        fv = np.where(self.ok[:, None], f.values, 0)
        gv = np.where(self.ok[:, None], g.values, 0)
        main = np.sum(gv.conj() * np.einsum("kij,kj->ki", self.delta_pinvs, fv)) / self.grid.N
        if self.kappa == 0:
            return complex(main)
        f_up, f_lo = self._split(f)
        g_up, g_lo = self._split(g)
        cross = self.gamma_r.apply(f_up).inner(g_lo) + f_lo.inner(self.gamma_r.apply(g_up))
        return complex(main + cross)

    def gram(self, funcs):
        """``G[i, j] = [f_j, f_i]``."""
        n = len(funcs)
        G = np.empty((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                G[i, j] = self.inner(funcs[j], funcs[i])
        return G

    def membership(self, f, tol=1e-6):
        """Residuals of the three defining conditions of ``D(s)``.

        Residuals are relative to ``max(1, ||f||)``.
        """
        up, lo = self._split(f)
        scale = max(1.0, f.norm())
        bl = self.b_l.evaluate_many(self.grid.nodes)
        br = self.b_r.evaluate_many(self.grid.nodes)
        r1 = project_minus(multiply(bl, up)).norm() / scale
        r2 = project_plus(multiply(np.conj(np.swapaxes(br, 1, 2)), lo)).norm() / scale
        proj = np.einsum("kij,kjl,kl->ki", self.deltas, self.delta_pinvs, f.values)
        dist = np.linalg.norm(f.values - proj, axis=1)[self.ok]
        r3 = float(np.max(dist)) / scale if dist.size else 0.0
        res = (float(r1), float(r2), r3)
        return MembershipResult(all(r <= tol for r in res), res)


def dbr_inner(s, f, g, grid=None):
    return DBRSpace(s, grid or f.grid).inner(f, g)


def dbr_membership(s, f, tol=1e-6):
    return DBRSpace(s, f.grid).membership(f, tol)


def adaptive_gram(s, fns, split, N=DEFAULT_GRID, rtol=1e-6, N_max=16384):
    """Gram matrix of callables under ``[., .]_{D(s)}`` with grid doubling.

    The grid is doubled until the Gram matrix changes by less than
    ``rtol`` relative; returns ``(gram, N_used, converged)``.
    """
    prev = None
    while True:
        space = DBRSpace(s, CircleGrid(N))
        funcs = [BoundaryFunction.from_callable(space.grid, fn, split) for fn in fns]
        G = space.gram(funcs)
        if prev is not None:
            change = np.linalg.norm(G - prev) / max(1.0, np.linalg.norm(G))
            if change < rtol:
                return G, N, True
        if 2 * N > N_max:
            return G, N, False
        prev, N = G, 2 * N
