"""Indefinite linear algebra on finite-dimensional Pontryagin spaces.

A space is a pair ``(C^n, X)`` with ``X`` Hermitian and invertible; the
inner product is ``[f, g] = g^* X f``.  The negative index is the number
of negative eigenvalues of ``X``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, InvalidInput

ZERO_TOL = 1e-8
HERMITIAN_TOL = 1e-10


def _scale(A):
    return max(1.0, np.linalg.norm(A, 2)) if A.size else 1.0


def hermitian_defect(A):
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A - A.conj().T, 2))


@dataclass(frozen=True, eq=False)
class GramSpace:
    """``C^dim`` with the indefinite inner product ``[f, g] = g^* gram f``."""

    gram: np.ndarray
    tol: float = field(default=HERMITIAN_TOL, repr=False)

    def __post_init__(self):
        gram = np.atleast_2d(np.asarray(self.gram, dtype=complex))
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise InvalidInput(f"gram must be square, got shape {gram.shape}")
        if hermitian_defect(gram) > self.tol * _scale(gram):
            raise InvalidInput("gram is not Hermitian")
        if gram.size and np.linalg.svd(gram, compute_uv=False)[-1] <= ZERO_TOL * _scale(gram):
            raise InvalidInput("gram is singular")
        object.__setattr__(self, "gram", 0.5 * (gram + gram.conj().T))

    @classmethod
    def hilbert(cls, dim):
        return cls(np.eye(dim, dtype=complex))

    @property
    def dim(self):
        return self.gram.shape[0]

    @property
    def negative_index(self):
        return inertia(self.gram).n_minus

    def inner(self, f, g):
        return np.vdot(g, self.gram @ f)

    def direct_sum(self, other):
        d1, d2 = self.dim, other.dim
        out = np.zeros((d1 + d2, d1 + d2), dtype=complex)
        out[:d1, :d1] = self.gram
        out[d1:, d1:] = other.gram
        return GramSpace(out)


class Inertia(NamedTuple):
    n_plus: int
    n_minus: int
    n_zero: int


def inertia(A, zero_tol=ZERO_TOL):
    """Count positive, negative and (numerically) zero eigenvalues.

    An eigenvalue counts as zero when its modulus is at most
    ``zero_tol * max(1, ||A||_2)``.

    Examples
    --------
    >>> inertia(np.diag([2.0, -3.0]))
    Inertia(n_plus=1, n_minus=1, n_zero=0)
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.shape[0] != A.shape[1]:
        raise InvalidInput(f"inertia needs a square matrix, got {A.shape}")
    if A.size == 0:
        return Inertia(0, 0, 0)
    scale = _scale(A)
    if hermitian_defect(A) > HERMITIAN_TOL * scale:
        raise InvalidInput("inertia needs a Hermitian matrix")
    w = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    cut = zero_tol * scale
    n_plus = int(np.sum(w > cut))
    n_minus = int(np.sum(w < -cut))
    return Inertia(n_plus, n_minus, len(w) - n_plus - n_minus)


def _check_maps(A, in_space, out_space):
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.shape != (out_space.dim, in_space.dim):
        raise InvalidInput(
            f"operator of shape {A.shape} does not map C^{in_space.dim} to C^{out_space.dim}"
        )
    return A


def indefinite_adjoint(A, in_space, out_space):
    """Adjoint with respect to the two Gram inner products.

    Returns ``B = X_in^{-1} A^* X_out`` so that ``[A f, g]_out = [f, B g]_in``.
    """
    A = _check_maps(A, in_space, out_space)
    return np.linalg.solve(in_space.gram, A.conj().T @ out_space.gram)


def isometry_residual(A, in_space, out_space, domain=None):
    """``||A^[*] A - I||_2``, optionally compressed to ``ran(domain)``.

    With ``domain = B`` (columns spanning a subspace of the input space)
    the residual is ``||B^* (A^* X_out A - X_in) B||_2``, which vanishes
    exactly when ``A`` is isometric on ``ran B``.
    """
    A = _check_maps(A, in_space, out_space)
    if domain is None:
        B = np.eye(in_space.dim)
        return float(np.linalg.norm(indefinite_adjoint(A, in_space, out_space) @ A - B, 2))
    B = np.atleast_2d(np.asarray(domain, dtype=complex))
    if B.shape[0] != in_space.dim:
        raise InvalidInput("domain basis does not live in the input space")
    AB = A @ B
    defect = AB.conj().T @ out_space.gram @ AB - B.conj().T @ in_space.gram @ B
    return float(np.linalg.norm(defect, 2))


def unitarity_residual(A, in_space, out_space):
    A = _check_maps(A, in_space, out_space)
    if A.shape[0] != A.shape[1]:
        raise InvalidInput("a unitary operator must be square in total dimension")
    Ax = indefinite_adjoint(A, in_space, out_space)
    eye = np.eye(A.shape[0])
    return float(max(np.linalg.norm(Ax @ A - eye, 2), np.linalg.norm(A @ Ax - eye, 2)))


@dataclass(frozen=True, eq=False)
class KernelEvaluator:
    """A Hermitian matrix kernel ``K(lam, omega)`` on a punctured disk.

    The domain is ``|lam| < radius`` with discs of radius ``margin`` cut
    out around each point of ``excluded``.
    """

    fn: Callable[[complex, complex], np.ndarray]
    size: int
    radius: float = 1.0
    excluded: tuple = ()
    margin: float = 1e-9

    def contains(self, lam):
        if abs(lam) >= self.radius:
            return False
        return all(abs(lam - z) > self.margin for z in self.excluded)

    def __call__(self, lam, omega):
        for z in (lam, omega):
            if not self.contains(z):
                raise DomainError(f"point {z!r} is outside the kernel domain", z)
        return np.atleast_2d(np.asarray(self.fn(lam, omega), dtype=complex))

    def symmetry_defect(self, pairs):
        worst = 0.0
        for lam, omega in pairs:
            d = self(lam, omega).conj().T - self(omega, lam)
            worst = max(worst, float(np.linalg.norm(d, 2)))
        return worst


def kernel_gram(K, points, directions=None):
    """Gram matrix ``[u_k^* K(lam_k, lam_j) u_j]_{k,j}``.

    Without directions the full block matrix ``[K(lam_k, lam_j)]`` is
    returned, which is the same as taking every coordinate vector.
    """
    pts = list(points)
    blocks = [[K(lk, lj) for lj in pts] for lk in pts]
    if directions is None:
        if not pts:
            return np.zeros((0, 0), dtype=complex)
        return np.block(blocks)
    dirs = [np.asarray(u, dtype=complex).reshape(-1) for u in directions]
    if len(dirs) != len(pts):
        raise InvalidInput("points and directions must have equal length")
    n = len(pts)
    G = np.empty((n, n), dtype=complex)
    for k in range(n):
        for j in range(n):
            G[k, j] = np.vdot(dirs[k], blocks[k][j] @ dirs[j])
    return G


class SquaresEstimate(NamedTuple):
    count: int
    stabilized: bool


def negative_squares_estimate(K, points, directions=None, zero_tol=ZERO_TOL):
    """Negative inertia of a sampled kernel Gram matrix.

    The count is also taken on the nested prefixes of one quarter and one
    half of the sample; ``stabilized`` is true when all three agree.
    """
    pts = list(points)
    dirs = None if directions is None else list(directions)
    if dirs is not None and len(dirs) != len(pts):
        raise InvalidInput("points and directions must have equal length")
    for z in pts:
        if not K.contains(z):
            raise DomainError(f"sample point {z!r} is outside the kernel domain", z)
    n = len(pts)
    G = kernel_gram(K, pts, dirs)
    block = 1 if dirs is not None else K.size
    counts = []
    for m in (n // 4, n // 2, n):
        if m == 0:
            continue
        counts.append(inertia(G[: m * block, : m * block], zero_tol).n_minus)
    if not counts:
        return SquaresEstimate(0, False)
    return SquaresEstimate(counts[-1], len(counts) == 3 and len(set(counts)) == 1)


def random_disk_points(rng, count, radius=0.95, avoid=(), margin=0.05):
    """Uniform random points in ``|z| < radius`` away from ``avoid``."""
    out = []
    while len(out) < count:
        r = radius * np.sqrt(rng.uniform())
        z = r * np.exp(2j * np.pi * rng.uniform())
        if all(abs(z - a) > margin for a in avoid):
            out.append(complex(z))
    return out


def estimate_kernel_signature(K, seed=0, start=4, max_points=128, radius=0.95,
                              zero_tol=ZERO_TOL):
    """Driver for :func:`negative_squares_estimate` with sample doubling.

    Draws a nested random sample of ``4 * start`` points, then doubles
    ``start`` until the count is stable over the nested prefixes or the
    sample would exceed ``max_points``.
    """
    rng = np.random.default_rng(seed)
    avoid = tuple(K.excluded)
    pool = []
    n = start
    est = SquaresEstimate(0, False)
    while 4 * n <= max_points:
        need = 4 * n - len(pool)
        pool.extend(random_disk_points(rng, need, min(radius, K.radius * 0.999), avoid,
                                       margin=max(0.05, K.margin)))
        est = negative_squares_estimate(K, pool, zero_tol=zero_tol)
        if est.stabilized:
            return est
        n *= 2
    return est
