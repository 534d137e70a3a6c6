"""Rational matrix functions in realization form.

A function is stored as ``s(lam) = lam^{-shift} (H + lam G (I - lam T)^{-1} F)``.
With ``shift = 0`` this is the transfer function of a colligation and
``s(0) = H``; a positive ``shift`` only exists so that poles at the origin
(``1/lam`` and friends) can be written down at all.

Blaschke-Potapov products, Schur-class tests, the Schur kernel, Krein-Langer
factorizations and the pseudoinverse of ``[[I, -s], [-s^*, I]]`` live here
as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.stats import qmc

from .errors import (DomainError, InvalidInput, NotGeneralizedSchur,
                     NumericalRankFailure, PoleError, UnsupportedPoleStructure)
from .pontryagin import (KernelEvaluator, SquaresEstimate,
                         estimate_kernel_signature, random_disk_points)

POLE_TOL = 1e-12
RANK_TOL = 1e-9
DISK_EDGE = 1.0 - 1e-6


def _orth(A, tol):
    """Orthonormal basis of ran A, rank cut relative to max(1, ||A||)."""
    if A.size == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    U, sv, _ = np.linalg.svd(A, full_matrices=False)
    cut = tol * max(1.0, sv[0] if sv.size else 0.0)
    return U[:, : int(np.sum(sv > cut))]


def _krylov(A, B, tol):
    Q = _orth(B, tol)
    while Q.shape[1] < A.shape[0]:
        Qn = _orth(np.hstack([Q, A @ Q]), tol)
        if Qn.shape[1] == Q.shape[1]:
            break
        Q = Qn
    return Q


class RationalMatrixFunction:
    """``p x q`` rational matrix function with state dimension ``d``.

    Parameters
    ----------
    T, F, G, H : array_like
        Realization blocks of shapes ``(d, d)``, ``(d, q)``, ``(p, d)`` and
        ``(p, q)``.  ``d = 0`` gives a constant (times ``lam^{-shift}``).
    shift : int
        Order of the explicit factor ``lam^{-shift}``.
    """

    def __init__(self, T, F, G, H, shift=0):
        H = np.atleast_2d(np.asarray(H, dtype=complex))
        p, q = H.shape
        T = np.asarray(T, dtype=complex)
        d = T.shape[0] if T.size else 0
        self.T = T.reshape(d, d)
        self.F = np.asarray(F, dtype=complex).reshape(d, q)
        self.G = np.asarray(G, dtype=complex).reshape(p, d)
        self.H = H
        if shift < 0:
            raise InvalidInput("shift must be nonnegative")
        self.shift = int(shift)

    @property
    def p(self):
        return self.H.shape[0]

    @property
    def q(self):
        return self.H.shape[1]

    @property
    def d(self):
        return self.T.shape[0]

    def __repr__(self):
        return f"RationalMatrixFunction(p={self.p}, q={self.q}, d={self.d}, shift={self.shift})"

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, H):
        H = np.atleast_2d(np.asarray(H, dtype=complex))
        p, q = H.shape
        return cls(np.zeros((0, 0)), np.zeros((0, q)), np.zeros((p, 0)), H)

    @classmethod
    def identity(cls, m):
        return cls.constant(np.eye(m))

    @classmethod
    def lam(cls, m=1):
        """``s(lam) = lam I_m``."""
        return cls(np.zeros((m, m)), np.eye(m), np.eye(m), np.zeros((m, m)))

    @classmethod
    def inverse_lam(cls, m=1):
        """``s(lam) = lam^{-1} I_m``."""
        return cls(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((m, 0)), np.eye(m), shift=1)

    # -- evaluation ---------------------------------------------------

    def _resolvent_apply(self, lam, X):
        A = np.eye(self.d) - lam * self.T
        sv = np.linalg.svd(A, compute_uv=False)
        if sv[-1] <= POLE_TOL * max(1.0, sv[0]):
            raise PoleError(f"pole of the realization at lam={lam!r}", lam)
        return np.linalg.solve(A, X)

    def __call__(self, lam):
        return self.evaluate(lam)

    def evaluate(self, lam):
        lam = complex(lam)
        if self.shift and lam == 0:
            raise PoleError("pole of order lam^-shift at the origin", lam)
        val = self.H.copy()
        if self.d:
            val = val + lam * (self.G @ self._resolvent_apply(lam, self.F))
        if self.shift:
            val = val / lam ** self.shift
        return val

    def evaluate_many(self, points):
        """Vectorized evaluation.

        Returns ``(values, ok)`` with ``values`` of shape ``(K, p, q)``;
        entries at poles are NaN and flagged false in ``ok``.
        """
        pts = np.asarray(points, dtype=complex).reshape(-1)
        K = pts.size
        vals = np.broadcast_to(self.H, (K, self.p, self.q)).copy()
        ok = np.ones(K, dtype=bool)
        if self.d:
            A = np.eye(self.d)[None] - pts[:, None, None] * self.T[None]
            sv = np.linalg.svd(A, compute_uv=False)
            ok &= sv[:, -1] > POLE_TOL * np.maximum(1.0, sv[:, 0])
            A[~ok] = np.eye(self.d)
            X = np.linalg.solve(A, np.broadcast_to(self.F, (K, self.d, self.q)))
            vals = vals + pts[:, None, None] * (self.G[None] @ X)
        if self.shift:
            ok &= pts != 0
            safe = np.where(ok, pts, 1.0)
            vals = vals / safe[:, None, None] ** self.shift
        vals[~ok] = np.nan
        return vals, ok

    def divided_difference(self, lam, mu):
        """``(s(lam) - s(mu)) / (lam - mu)``, equal to ``s'(lam)`` at ``lam == mu``.

        Uses ``lam R(lam) - mu R(mu) = (lam - mu) R(lam) R(mu)`` so no
        cancellation occurs near the diagonal.
        """
        lam, mu = complex(lam), complex(mu)
        if self.shift:
            if lam == 0 or mu == 0:
                raise PoleError("divided difference at the origin", 0j)
            g = RationalMatrixFunction(self.T, self.F, self.G, self.H, self.shift - 1)
            return (g.divided_difference(lam, mu) - self.evaluate(mu)) / lam
        if not self.d:
            return np.zeros((self.p, self.q), dtype=complex)
        Rf = self._resolvent_apply(mu, self.F)
        return self.G @ self._resolvent_apply(lam, Rf)

    def derivative(self, lam):
        return self.divided_difference(lam, lam)

    # -- structure ----------------------------------------------------

    def poles(self):
        """Finite poles of this realization (not reduced first)."""
        out = []
        if self.d:
            ev = np.linalg.eigvals(self.T)
            big = ev[np.abs(ev) > 1e-13]
            out.extend((1.0 / big).tolist())
        if self.shift:
            out.append(0j)
        return np.array(out, dtype=complex)

    def disk_poles(self, radius=1.0):
        red = self.normalized().minimal()
        pol = red.poles()
        pol = pol[np.abs(pol) < radius]
        # deterministic order: by modulus, then argument
        order = np.lexsort((np.round(np.angle(pol), 12), np.round(np.abs(pol), 12)))
        return pol[order]

    def minimal(self, tol=1e-10):
        """Drop uncontrollable and unobservable state (Kalman reduction)."""
        if self.d == 0:
            return self
        Qc = _krylov(self.T, self.F, tol)
        T1, F1, G1 = Qc.conj().T @ self.T @ Qc, Qc.conj().T @ self.F, self.G @ Qc
        if T1.shape[0] == 0:
            return RationalMatrixFunction(T1, F1, G1, self.H, self.shift)
        Qo = _krylov(T1.conj().T, G1.conj().T, tol)
        return RationalMatrixFunction(Qo.conj().T @ T1 @ Qo, Qo.conj().T @ F1,
                                      G1 @ Qo, self.H, self.shift)

    def normalized(self, tol=1e-12):
        """Cancel factors ``lam`` against ``lam^{-shift}`` where ``s~(0) = 0``."""
        f = self
        while f.shift and np.linalg.norm(f.H) <= tol * max(1.0, np.linalg.norm(f.G) * np.linalg.norm(f.F)):
            if f.d == 0:
                return RationalMatrixFunction.constant(np.zeros_like(f.H))
            f = RationalMatrixFunction(f.T, f.F, f.G @ f.T, f.G @ f.F, f.shift - 1)
        return f

    def times_lam(self):
        """``lam * s(lam)`` without touching ``shift`` when it is positive."""
        if self.shift:
            return RationalMatrixFunction(self.T, self.F, self.G, self.H, self.shift - 1)
        p, q, d = self.p, self.q, self.d
        T = np.zeros((q + d, q + d), dtype=complex)
        T[q:, :q] = self.F
        T[q:, q:] = self.T
        F = np.vstack([np.eye(q), np.zeros((d, q))])
        G = np.hstack([self.H, self.G])
        return RationalMatrixFunction(T, F, G, np.zeros((p, q)))

    def conj_reflect(self):
        """``s^#(lam) = s(conj(lam))^*`` as a realization."""
        return RationalMatrixFunction(self.T.conj().T, self.G.conj().T, self.F.conj().T,
                                      self.H.conj().T, self.shift)

    # -- algebra --------------------------------------------------------

    def __matmul__(self, other):
        if not isinstance(other, RationalMatrixFunction):
            return NotImplemented
        if self.q != other.p:
            raise InvalidInput(f"cannot multiply {self.p}x{self.q} by {other.p}x{other.q}")
        d1, d2 = self.d, other.d
        T = np.zeros((d1 + d2, d1 + d2), dtype=complex)
        T[:d1, :d1] = self.T
        T[:d1, d1:] = self.F @ other.G
        T[d1:, d1:] = other.T
        F = np.vstack([self.F @ other.H, other.F])
        G = np.hstack([self.G, self.H @ other.G])
        return RationalMatrixFunction(T, F, G, self.H @ other.H, self.shift + other.shift)

    def __add__(self, other):
        if not isinstance(other, RationalMatrixFunction):
            return NotImplemented
        if (self.p, self.q) != (other.p, other.q):
            raise InvalidInput("shape mismatch in sum")
        k = max(self.shift, other.shift)
        a, b = self._raise_to(k), other._raise_to(k)
        return RationalMatrixFunction(
            scipy.linalg.block_diag(a.T, b.T), np.vstack([a.F, b.F]),
            np.hstack([a.G, b.G]), a.H + b.H, k)

    def _raise_to(self, k):
        # lam^{-shift} g == lam^{-k} (lam^{k-shift} g) for k >= shift
        if k < self.shift:
            raise InvalidInput("cannot lower the shift of a realization")
        g = RationalMatrixFunction(self.T, self.F, self.G, self.H, 0)
        for _ in range(k - self.shift):
            g = g.times_lam()
        return RationalMatrixFunction(g.T, g.F, g.G, g.H, k)

    def __neg__(self):
        return RationalMatrixFunction(self.T, self.F, -self.G, -self.H, self.shift)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c):
        return RationalMatrixFunction(self.T, self.F, c * self.G, c * self.H, self.shift)

    def left_mul(self, A):
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        return RationalMatrixFunction(self.T, self.F, A @ self.G, A @ self.H, self.shift)

    def right_mul(self, A):
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        return RationalMatrixFunction(self.T, self.F @ A, self.G, self.H @ A, self.shift)

    def inverse(self):
        """Pointwise inverse; needs a square, invertible value at the origin."""
        if self.p != self.q:
            raise InvalidInput("only square functions can be inverted")
        f = self.normalized()
        k = f.shift
        base = RationalMatrixFunction(f.T, f.F, f.G, f.H, 0)
        sv = np.linalg.svd(base.H, compute_uv=False)
        if sv[-1] <= 1e-12 * max(1.0, sv[0]):
            raise InvalidInput("value at the origin is singular; realization inverse unavailable")
        Hi = np.linalg.inv(base.H)
        inv = RationalMatrixFunction(base.T - base.F @ Hi @ base.G, base.F @ Hi,
                                     -Hi @ base.G, Hi)
        for _ in range(k):
            inv = inv.times_lam()
        return inv


def hstack(funcs):
    k = max(f.shift for f in funcs)
    fs = [f._raise_to(k) for f in funcs]
    return RationalMatrixFunction(
        scipy.linalg.block_diag(*[f.T for f in fs]),
        scipy.linalg.block_diag(*[f.F for f in fs]),
        np.hstack([f.G for f in fs]), np.hstack([f.H for f in fs]), k)


def vstack(funcs):
    k = max(f.shift for f in funcs)
    fs = [f._raise_to(k) for f in funcs]
    return RationalMatrixFunction(
        scipy.linalg.block_diag(*[f.T for f in fs]), np.vstack([f.F for f in fs]),
        scipy.linalg.block_diag(*[f.G for f in fs]), np.vstack([f.H for f in fs]), k)


# ---------------------------------------------------------------------------
# Blaschke-Potapov products


def _is_projection(P, tol=1e-12):
    return (np.linalg.norm(P @ P - P) <= tol * max(1.0, np.linalg.norm(P))
            and np.linalg.norm(P - P.conj().T) <= tol * max(1.0, np.linalg.norm(P)))


def projection_onto(vectors):
    """Orthogonal projection onto the span of the given column vectors."""
    V = np.atleast_2d(np.asarray(vectors, dtype=complex))
    if V.shape[0] == 1 and V.shape[1] > 1:
        V = V.T
    Q = _orth(V, 1e-12)
    return Q @ Q.conj().T


def _range_basis(P):
    w, V = np.linalg.eigh(0.5 * (P + P.conj().T))
    return V[:, w > 0.5]


def blaschke_factor_function(alpha, P):
    """Realization of ``I - P + (lam - alpha)/(1 - conj(alpha) lam) P``."""
    P = np.asarray(P, dtype=complex)
    m = P.shape[0]
    U = _range_basis(P)
    r = U.shape[1]
    a = complex(alpha)
    return RationalMatrixFunction(np.conj(a) * np.eye(r), U.conj().T,
                                  (1 - abs(a) ** 2) * U, np.eye(m) - (1 + a) * P)


def blaschke_factor_inverse(alpha, P):
    P = np.asarray(P, dtype=complex)
    a = complex(alpha)
    if a != 0:
        return blaschke_factor_function(a, P).inverse()
    m = P.shape[0]
    W = _range_basis(np.eye(m) - P)
    r = W.shape[1]
    # lam^{-1} (P + lam (I - P))
    return RationalMatrixFunction(np.zeros((r, r)), W.conj().T, W, P, shift=1)


@dataclass(frozen=True, eq=False)
class BlaschkePotapovProduct:
    """Ordered product of elementary factors ``(alpha_j, P_j)``."""

    dim: int
    factors: tuple = ()

    def __post_init__(self):
        clean = []
        for alpha, P in self.factors:
            P = np.atleast_2d(np.asarray(P, dtype=complex))
            if P.shape != (self.dim, self.dim):
                raise InvalidInput(f"projection of shape {P.shape} in a {self.dim}-dim product")
            if not _is_projection(P):
                raise InvalidInput("factor matrix is not an orthogonal projection")
            if abs(alpha) >= 1:
                raise InvalidInput(f"factor zero {alpha!r} is not inside the unit disk")
            clean.append((complex(alpha), P))
        object.__setattr__(self, "factors", tuple(clean))

    @classmethod
    def identity(cls, m):
        return cls(m, ())

    @property
    def zeros(self):
        return [a for a, _ in self.factors]

    def __matmul__(self, other):
        if self.dim != other.dim:
            raise InvalidInput("dimension mismatch in product")
        return BlaschkePotapovProduct(self.dim, self.factors + other.factors)

    def __call__(self, lam):
        return bp_evaluate(self, lam)

    def evaluate_many(self, points):
        pts = np.asarray(points, dtype=complex).reshape(-1)
        out = np.broadcast_to(np.eye(self.dim, dtype=complex), (pts.size, self.dim, self.dim)).copy()
        eye = np.eye(self.dim)
        for alpha, P in self.factors:
            den = 1 - np.conj(alpha) * pts
            phi = (pts - alpha) / np.where(den == 0, np.nan, den)
            out = out @ (eye[None] - P[None] + phi[:, None, None] * P[None])
        return out

    def as_function(self):
        f = RationalMatrixFunction.identity(self.dim)
        for alpha, P in self.factors:
            f = f @ blaschke_factor_function(alpha, P)
        return f

    def inverse_function(self):
        f = RationalMatrixFunction.identity(self.dim)
        for alpha, P in reversed(self.factors):
            f = f @ blaschke_factor_inverse(alpha, P)
        return f

    def adjoint_factors(self):
        """Factors of ``b^#(lam) = b(conj lam)^*`` (reversed, conjugated zeros)."""
        return BlaschkePotapovProduct(self.dim, tuple((np.conj(a), P) for a, P in reversed(self.factors)))


def bp_evaluate(b, lam):
    lam = complex(lam)
    out = np.eye(b.dim, dtype=complex)
    for alpha, P in b.factors:
        den = 1 - np.conj(alpha) * lam
        if abs(den) <= POLE_TOL:
            raise PoleError(f"pole of a Blaschke-Potapov factor at lam={lam!r}", lam)
        out = out @ (np.eye(b.dim) - P + (lam - alpha) / den * P)
    return out


def bp_degree(b):
    return int(sum(round(np.trace(P).real) for _, P in b.factors))


# ---------------------------------------------------------------------------
# Schur class


class SchurTest(NamedTuple):
    is_schur: bool
    worst_norm: float
    pole: complex | None = None


def _disk_samples(n_samples, seed):
    halton = qmc.Halton(d=2, scramble=True, seed=seed)
    u = halton.random(n_samples)
    inner = DISK_EDGE * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])
    ring = DISK_EDGE * np.exp(2j * np.pi * (np.arange(n_samples) + 0.5) / n_samples)
    return np.concatenate([inner, ring])


def schur_membership(f, n_samples=256, tol=1e-9, seed=0):
    """Sampled test of ``sup_{|lam|<1} ||f(lam)|| <= 1``.

    Poles in ``|lam| <= 1 - 1e-6`` make the answer false immediately and
    are reported in ``pole``.
    """
    poles = f.disk_poles(radius=DISK_EDGE + 1e-15)
    if poles.size:
        return SchurTest(False, float("inf"), complex(poles[0]))
    vals, ok = f.evaluate_many(_disk_samples(n_samples, seed))
    if not ok.all():
        return SchurTest(False, float("inf"), None)
    worst = float(np.max(np.linalg.norm(vals, ord=2, axis=(1, 2)))) if vals.size else 0.0
    return SchurTest(worst <= 1 + tol, worst, None)


def _evaluate(f, lam):
    return f.evaluate(lam) if isinstance(f, RationalMatrixFunction) else np.atleast_2d(f(lam))


def schur_kernel(f, lam, omega):
    """``(I - s(lam) s(omega)^*) / (1 - lam conj(omega))``."""
    den = 1 - complex(lam) * np.conj(omega)
    if abs(den) <= 1e-14:
        raise DomainError("lam * conj(omega) = 1 on the Schur kernel", lam)
    a, b = _evaluate(f, lam), _evaluate(f, omega)
    return (np.eye(a.shape[0]) - a @ b.conj().T) / den


def schur_kernel_evaluator(f, poles=None):
    if poles is None:
        poles = f.disk_poles() if isinstance(f, RationalMatrixFunction) else ()
    p = f.p if isinstance(f, RationalMatrixFunction) else _evaluate(f, 0.0).shape[0]
    return KernelEvaluator(lambda l, w: schur_kernel(f, l, w), p, 1.0, tuple(complex(z) for z in poles))


def delta_matrix(s_value):
    S = np.atleast_2d(np.asarray(s_value, dtype=complex))
    p, q = S.shape
    return np.block([[np.eye(p), -S], [-S.conj().T, np.eye(q)]])


def delta_pinv(f, mu, rank_tol=RANK_TOL):
    """Moore-Penrose pseudoinverse of ``[[I, -s(mu)], [-s(mu)^*, I]]`` for ``|mu| = 1``."""
    if abs(abs(mu) - 1) > 1e-12:
        raise DomainError(f"{mu!r} is not on the unit circle", mu)
    try:
        S = _evaluate(f, mu)
    except PoleError as exc:
        raise DomainError(f"boundary pole at {mu!r}", mu) from exc
    return np.linalg.pinv(delta_matrix(S), rcond=rank_tol, hermitian=True)


# ---------------------------------------------------------------------------
# Krein-Langer factorization


def residue(f, alpha, n_nodes=64):
    """Laurent coefficients of orders -1 and -2 of ``f`` at ``alpha``.

    Trapezoidal rule on a circle around ``alpha`` that stays clear of the
    other poles; both coefficients come from the same samples.
    """
    others = [z for z in f.poles() if abs(z - alpha) > 1e-8 * max(1.0, abs(alpha))]
    rho = 0.4 * min([abs(z - alpha) for z in others], default=1.0)
    rho = min(rho, 0.25)
    theta = 2 * np.pi * np.arange(n_nodes) / n_nodes
    w = rho * np.exp(1j * theta)
    vals, ok = f.evaluate_many(alpha + w)
    if not ok.all():
        raise NumericalRankFailure("residue contour passes through a pole")
    r1 = np.mean(vals * w[:, None, None], axis=0)
    r2 = np.mean(vals * (w ** 2)[:, None, None], axis=0)
    return r1, r2


@dataclass(frozen=True, eq=False)
class KLFactorization:
    side: str
    blaschke_part: BlaschkePotapovProduct
    schur_part: RationalMatrixFunction
    certified_degree: int
    kernel_estimate: SquaresEstimate | None = None
    rank_margin: float = float("nan")
    reconstruction_residual: float = float("nan")
    schur_norm: float = float("nan")
    extra: dict = field(default_factory=dict)


def _peel(f, side, max_steps=None, tol=1e-9):
    f = f.normalized().minimal()
    m = f.p if side == "left" else f.q
    factors = []
    limit = max_steps or (f.d + m * (f.shift + 1) + 4)
    for _ in range(limit):
        poles = f.disk_poles()
        if poles.size == 0:
            return f, factors
        if f.shift > 1:
            raise UnsupportedPoleStructure("pole of order > 1 at the origin")
        alpha = complex(poles[0])
        r1, r2 = residue(f, alpha)
        n1 = np.linalg.norm(r1, 2)
        if np.linalg.norm(r2, 2) > 1e-7 * max(1.0, n1):
            raise UnsupportedPoleStructure(f"pole at {alpha!r} is not simple")
        if n1 <= tol:
            raise NumericalRankFailure(f"pole at {alpha!r} has vanishing residue but survived reduction")
        U, _, Vh = np.linalg.svd(r1)
        u = U[:, 0] if side == "left" else Vh[0].conj()
        P = np.outer(u, u.conj())
        bj = blaschke_factor_function(alpha, P)
        f = (bj @ f) if side == "left" else (f @ bj)
        f = f.normalized().minimal()
        factors.append((alpha, P))
    raise NumericalRankFailure("pole peeling did not terminate")


def _krein_langer(f, side, seed=0, n_check=50):
    s_part, peeled = _peel(f, side)
    m = f.p if side == "left" else f.q
    if side == "left":
        # s_l = b_k ... b_1 f, so b_l lists the factors last-peeled first
        b = BlaschkePotapovProduct(m, tuple(reversed(peeled)))
    else:
        b = BlaschkePotapovProduct(m, tuple(peeled))
    test = schur_membership(s_part, seed=seed)
    if not test.is_schur:
        raise NotGeneralizedSchur(
            f"peeled function is not contractive (sup norm {test.worst_norm:.6g})")
    rng = np.random.default_rng(seed)
    poles = [complex(z) for z in f.disk_poles()]
    pts = random_disk_points(rng, n_check, radius=0.95, avoid=poles, margin=0.02)
    recon, margin = 0.0, float("inf")
    for lam in pts:
        bl, fv, sv = bp_evaluate(b, lam), f.evaluate(lam), s_part.evaluate(lam)
        if side == "left":
            recon = max(recon, float(np.linalg.norm(bl @ fv - sv, 2)))
            stacked = np.hstack([bl, sv])
        else:
            recon = max(recon, float(np.linalg.norm(fv @ bl - sv, 2)))
            stacked = np.vstack([bl, sv])
        margin = min(margin, float(np.linalg.svd(stacked, compute_uv=False)[m - 1]))
    degree = bp_degree(b)
    est = estimate_kernel_signature(schur_kernel_evaluator(f, poles), seed=seed)
    if est.stabilized and est.count != degree:
        raise NotGeneralizedSchur(
            f"kernel has {est.count} negative squares but {degree} poles were peeled")
    return KLFactorization(side, b, s_part, degree, est, margin, recon, test.worst_norm)


def krein_langer_left(f, seed=0):
    """Left factorization ``f = b_l^{-1} s_l`` by peeling simple disk poles.

    At each pole the leading left singular vector ``u`` of the residue
    defines the factor with projection ``u u^*``; multiplying by it from
    the left lowers the residue rank by one.
    """
    return _krein_langer(f, "left", seed)


def krein_langer_right(f, seed=0):
    """Right factorization ``f = s_r b_r^{-1}``."""
    return _krein_langer(f, "right", seed)
