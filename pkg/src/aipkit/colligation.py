"""Unitary colligations on Pontryagin state spaces and their functional model.

A colligation is a block operator ``U = [[T, F], [G, H]]`` from
``(C^d, X) (+) C^q`` to ``(C^d, X) (+) C^p`` that is unitary for the
Gram matrices ``X (+) I``.  Its characteristic function is
``s(lam) = H + lam G (I - lam T)^{-1} F``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from .errors import DomainError, InvalidInput, NotSimple
from .pontryagin import GramSpace, inertia, unitarity_residual
from .ratfun import POLE_TOL, RationalMatrixFunction

UNITARY_TOL = 1e-10
SIMPLE_TOL = 1e-9


class Colligation:
    """Unitary colligation with state Gram ``X``.

    Parameters
    ----------
    gram : array_like, shape (d, d)
        Hermitian invertible Gram matrix of the state space.
    T, F, G, H : array_like
        Blocks of shapes ``(d, d)``, ``(d, q)``, ``(p, d)``, ``(p, q)``.
    tol : float
        Bound on the unitarity residual, relative to ``max(1, ||U||_2)^2``.

    Raises
    ------
    InvalidInput
        On inconsistent shapes or when ``U`` is not unitary.
    """

    def __init__(self, gram, T, F, G, H, tol=UNITARY_TOL):
        self.state = gram if isinstance(gram, GramSpace) else GramSpace(gram)
        d = self.state.dim
        T = np.asarray(T, dtype=complex).reshape(d, d)
        F = np.asarray(F, dtype=complex)
        G = np.asarray(G, dtype=complex)
        H = np.atleast_2d(np.asarray(H, dtype=complex))
        p, q = H.shape
        F = F.reshape(d, q)
        G = G.reshape(p, d)
        if d + p != d + q:
            raise InvalidInput("a unitary colligation needs equal input and output dimensions")
        self.T, self.F, self.G, self.H = T, F, G, H
        self.U = np.block([[T, F], [G, H]])
        self.residual = unitarity_residual(
            self.U, self.state.direct_sum(GramSpace.hilbert(q)),
            self.state.direct_sum(GramSpace.hilbert(p)))
        if self.residual > tol * max(1.0, np.linalg.norm(self.U, 2)) ** 2:
            raise InvalidInput(f"operator is not unitary (residual {self.residual:.3e})")

    @property
    def d(self):
        return self.state.dim

    @property
    def p(self):
        return self.H.shape[0]

    @property
    def q(self):
        return self.H.shape[1]

    @property
    def gram(self):
        return self.state.gram

    @property
    def kappa_state(self):
        return inertia(self.gram).n_minus

    def adjoint_blocks(self):
        """``T^x, G^x`` (adjoints in the state Gram)."""
        X = self.gram
        Tx = np.linalg.solve(X, self.T.conj().T @ X)
        Gx = np.linalg.solve(X, self.G.conj().T)
        return Tx, Gx

    def u_cross(self):
        """Indefinite adjoint ``U^x`` from ``H (+) L_1`` to ``H (+) L_2``."""
        d, p, q = self.d, self.p, self.q
        S_in = np.eye(d + q, dtype=complex)
        S_in[:d, :d] = self.gram
        S_out = np.eye(d + p, dtype=complex)
        S_out[:d, :d] = self.gram
        return np.linalg.solve(S_in, self.U.conj().T @ S_out)


def characteristic_function(colligation):
    c = colligation
    return RationalMatrixFunction(c.T, c.F, c.G, c.H)


def is_simple(colligation, tol=SIMPLE_TOL):
    """Rank test on ``[F, TF, ..., G^x, T^x G^x, ...]``.

    Returns ``(simple, rank, defect_dim)``.
    """
    c = colligation
    d = c.d
    if d == 0:
        return True, 0, 0
    Tx, Gx = c.adjoint_blocks()
    blocks = []
    A, B = c.F, Gx
    for _ in range(d):
        blocks.extend([A, B])
        A, B = c.T @ A, Tx @ B
    K = np.hstack(blocks)
    sv = np.linalg.svd(K, compute_uv=False)
    rank = int(np.sum(sv > tol * max(1.0, sv[0]))) if sv.size else 0
    return rank == d, rank, d - rank


def _value(s, lam):
    return np.atleast_2d(s(lam))


def ds_kernel(s, mu, lam):
    """The four-block kernel ``D_s(mu, lam)``, as a function of ``lam``.

    The difference quotients use the resolvent form of
    :meth:`RationalMatrixFunction.divided_difference`, so ``lam = mu`` needs
    no special casing.
    """
    lam, mu = complex(lam), complex(mu)
    if abs(1 - lam * np.conj(mu)) <= POLE_TOL:
        raise DomainError("lam * conj(mu) = 1 on the kernel diagonal", lam)
    sl, sm = _value(s, lam), _value(s, mu)
    p, q = sl.shape
    dd = np.atleast_2d(s.divided_difference(lam, mu))
    dd_bar = np.atleast_2d(s.divided_difference(mu, lam)).conj().T
    K = np.empty((p + q, p + q), dtype=complex)
    K[:p, :p] = (np.eye(p) - sl @ sm.conj().T) / (1 - lam * np.conj(mu))
    K[:p, p:] = -mu * dd
    K[p:, :p] = -np.conj(lam) * dd_bar
    K[p:, p:] = np.conj(lam) * mu * (np.eye(q) - sl.conj().T @ sm) / (1 - np.conj(lam) * mu)
    return K


def _resolvent(c, lam):
    M = np.eye(c.d) - lam * c.T
    if c.d and np.linalg.svd(M, compute_uv=False)[-1] <= POLE_TOL * max(1.0, np.linalg.norm(M, 2)):
        raise DomainError(f"1/lam is an eigenvalue of T at lam={lam!r}", lam)
    return np.linalg.inv(M) if c.d else M


def fourier_matrix(colligation, lam):
    """Matrix ``F(lam)`` with ``(F h)(lam) = F(lam) h``, shape ``(p+q, d)``."""
    c = colligation
    R = _resolvent(c, complex(lam))
    top = c.G @ R
    bottom = -np.conj(lam) * c.F.conj().T @ R.conj().T @ c.gram
    return np.vstack([top, bottom])


def fourier_representation(colligation, h, lam):
    h = np.asarray(h, dtype=complex).reshape(colligation.d)
    return fourier_matrix(colligation, lam) @ h


def g1(colligation, lam):
    c = colligation
    return np.linalg.solve(c.gram, _resolvent(c, lam).conj().T @ c.G.conj().T)


def g2(colligation, lam):
    c = colligation
    return -_resolvent(c, lam) @ c.F


def check_kernel_factorization(colligation, pairs, rng=None):
    """Max deviation between both sides of the kernel factorization identity.

    For each ``(mu, lam)`` random ``f, g`` are drawn and
    ``(D_s(mu, lam) f, g)`` is compared with
    ``[G_1(mu) f_1 + mu G_2(mu) f_2, G_1(lam) g_1 + lam G_2(lam) g_2]``.
    """
    c = colligation
    rng = rng if rng is not None else np.random.default_rng(0)
    s = characteristic_function(c)
    p, q = c.p, c.q
    worst = 0.0
    for mu, lam in pairs:
        f = rng.standard_normal(p + q) + 1j * rng.standard_normal(p + q)
        g = rng.standard_normal(p + q) + 1j * rng.standard_normal(p + q)
        lhs = np.vdot(g, ds_kernel(s, mu, lam) @ f)
        a = g1(c, mu) @ f[:p] + mu * g2(c, mu) @ f[p:]
        b = g1(c, lam) @ g[:p] + lam * g2(c, lam) @ g[p:]
        rhs = np.vdot(b, c.gram @ a)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return worst


def _model_blocks(s, t, f_vals, f0):
    """Apply the functional-model formulas at a circle point ``t``.

    ``f_vals`` holds samples ``f(t)`` (columns are functions), ``f0`` their
    upper components at 0.
    """
    st = np.atleast_2d(s(t))
    p, q = st.shape
    corr = np.vstack([f0, -st.conj().T @ f0])
    Ts = np.conj(t) * (f_vals - corr)
    s0 = np.atleast_2d(s(0.0))
    Fs = -np.conj(t) * np.vstack([s0 - st, -st.conj().T @ s0 + np.eye(q)])
    return Ts, Fs


class FunctionalModel(NamedTuple):
    colligation: Colligation
    uniteq_residual: float
    eft_residual: float
    fit_residual: float


def _circle_points(c, n, rng):
    pts = []
    while len(pts) < n:
        t = np.exp(2j * np.pi * rng.uniform())
        M = np.eye(c.d) - t * c.T
        if c.d == 0 or np.linalg.svd(M, compute_uv=False)[-1] > 1e-6:
            pts.append(t)
    return pts


def functional_model(colligation, n_points=32, seed=0, tol=SIMPLE_TOL):
    """Functional-model colligation in Fourier coordinates, with checks.

    The model operators act on boundary functions ``f = F h``.  They are
    applied to ``F e_i`` at random circle points and compared with
    ``F(T e_i)``, ``F(F e_j)`` and so on (unitary equivalence); the boundary
    identity for ``U^x`` is checked at the same points.  Coordinates of
    the model operators are obtained by least squares.

    Raises
    ------
    NotSimple
        If ``is_simple`` fails.
    """
    c = colligation
    simple, rank, defect = is_simple(c, tol)
    if not simple:
        raise NotSimple(f"colligation is not simple (rank {rank}, defect {defect})")
    rng = np.random.default_rng(seed)
    s = characteristic_function(c)
    d, p, q = c.d, c.p, c.q
    pts = _circle_points(c, n_points, rng)
    Ux = c.u_cross()
    f0 = fourier_matrix(c, 0.0)[:p]
    stack_phi, stack_T, stack_F = [], [], []
    uniteq = eft = 0.0
    for t in pts:
        Phi = fourier_matrix(c, t)
        st = np.atleast_2d(s(t))
        scale = max(1.0, np.linalg.norm(Phi, 2), np.linalg.norm(st, 2))
        Ts, Fs = _model_blocks(s, t, Phi, f0)
        r = max(np.linalg.norm(Ts - Phi @ c.T, 2), np.linalg.norm(Fs - Phi @ c.F, 2))
        uniteq = max(uniteq, r / scale)
        # boundary identity: F P_H U^x + [s; -I] P_L2 U^x = t F P_H + [I; -s^*] P_L1
        lhs = Phi @ Ux[:d] + np.vstack([st, -np.eye(q)]) @ Ux[d:]
        rhs = np.hstack([t * Phi, np.vstack([np.eye(p), -st.conj().T])])
        eft = max(eft, np.linalg.norm(lhs - rhs, 2) / scale)
        stack_phi.append(Phi)
        stack_T.append(Ts)
        stack_F.append(Fs)
    A = np.vstack(stack_phi)
    T_m, *_ = np.linalg.lstsq(A, np.vstack(stack_T), rcond=None)
    F_m, *_ = np.linalg.lstsq(A, np.vstack(stack_F), rcond=None)
    fit = float(max(np.linalg.norm(A @ T_m - np.vstack(stack_T)),
                    np.linalg.norm(A @ F_m - np.vstack(stack_F))) / max(1.0, np.linalg.norm(A)))
    # G_s f = f_+(0) and G_s(F h) = G h; H_s = s(0)
    G_m = f0
    H_m = np.atleast_2d(s(0.0))
    uniteq = max(uniteq, float(np.linalg.norm(G_m - c.G, 2)), float(np.linalg.norm(H_m - c.H, 2)))
    model = Colligation(c.gram, T_m, F_m, G_m, H_m, tol=max(UNITARY_TOL, 10 * fit))
    return FunctionalModel(model, float(uniteq), float(eft), fit)


def random_colligation(rng, d, m, kappa=0, scale=1.0, max_tries=200):
    """Random simple unitary colligation with ``p = q = m``.

    ``U = expm(i S^{-1} K)`` with ``S = J_kappa (+) I`` and ``K`` Hermitian
    is ``S``-unitary; a congruence by a random well-conditioned ``L`` moves
    it to the state Gram ``X = L^* J_kappa L``.  Draws whose ``T`` has an
    eigenvalue within 0.05 of the unit circle are rejected.
    """
    if not 0 <= kappa <= d:
        raise InvalidInput("kappa must lie between 0 and d")
    n = d + m
    sig = np.ones(n)
    sig[:kappa] = -1
    for _ in range(max_tries):
        K = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        K = scale * (K + K.conj().T) / (2 * np.sqrt(n))
        U0 = expm(1j * sig[:, None] * K)
        L = np.eye(d) + 0.3 * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(max(d, 1))
        if d and np.linalg.cond(L) > 10:
            continue
        X = L.conj().T @ np.diag(sig[:d]) @ L
        Lf = np.eye(n, dtype=complex)
        Lf[:d, :d] = L
        U = np.linalg.solve(Lf, U0 @ Lf)
        T = U[:d, :d]
        if d and np.min(np.abs(np.abs(np.linalg.eigvals(T)) - 1)) < 0.05:
            continue
        try:
            c = Colligation(0.5 * (X + X.conj().T), T, U[:d, d:], U[d:, :d], U[d:, d:])
        except InvalidInput:
            continue
        if is_simple(c)[0]:
            return c
    raise RuntimeError("could not draw a simple colligation")
