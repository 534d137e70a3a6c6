"""The abstract interpolation problem with an indefinite Pick operator.

Data are ``M, N`` (``n x n``), ``C1`` (``p x n``), ``C2`` (``q x n``) and a
Hermitian invertible ``P`` with

    M^* P M - N^* P N = C1^* C1 - C2^* C2.

Solutions are generalized Schur functions ``s`` together with a map
``Phi`` into the de Branges-Rovnyak space ``D(s)``.  They are produced
either as linear fractional transforms of Schur class parameters under
the resolvent matrix ``W`` or as characteristic functions of unitary
extensions of the isometry ``V: [Mf; C2 f] -> [Nf; C1 f]``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from .colligation import Colligation, fourier_matrix, is_simple
from .errors import (DeterminateCase, DomainError, ExtensionInfeasible, InvalidInput,
                     PencilSingular)
from .hardy import DEFAULT_GRID, CircleGrid, DBRSpace
from .pontryagin import (HERMITIAN_TOL, ZERO_TOL, GramSpace, KernelEvaluator, hermitian_defect,
                         inertia, isometry_residual, negative_squares_estimate,
                         random_disk_points, estimate_kernel_signature)
from .ratfun import (RationalMatrixFunction, delta_matrix, schur_kernel_evaluator,
                     schur_membership)

LOGGER = logging.getLogger(__name__)

STEIN_TOL = 1e-10
PENCIL_TOL = 1e-10
N_ANCHORS = 720


def _mat(A, rows=None, cols=None, name="matrix"):
    A = np.asarray(A, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim == 1:
        A = A.reshape(1, -1) if rows == 1 else A.reshape(-1, 1)
    if A.ndim != 2:
        raise InvalidInput(f"{name} must be two-dimensional")
    if rows is not None and A.shape[0] != rows or cols is not None and A.shape[1] != cols:
        raise InvalidInput(f"{name} has shape {A.shape}, expected ({rows}, {cols})")
    return A


def _scale(*mats):
    return max([1.0] + [float(np.linalg.norm(A, 2)) for A in mats if A.size])


@dataclass(frozen=True, eq=False)
class AipData:
    """Problem data; shapes are checked, the assumptions are not (see :func:`validate`)."""

    M: np.ndarray
    N: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    P: np.ndarray
    kappa_target: int | None = None
    anchor: complex | None = None

    def __post_init__(self):
        M = _mat(self.M, name="M")
        n = M.shape[0]
        object.__setattr__(self, "M", _mat(M, n, n, "M"))
        object.__setattr__(self, "N", _mat(self.N, n, n, "N"))
        object.__setattr__(self, "C1", _mat(self.C1, None, n, "C1"))
        object.__setattr__(self, "C2", _mat(self.C2, None, n, "C2"))
        object.__setattr__(self, "P", _mat(self.P, n, n, "P"))
        if self.kappa_target is not None and self.kappa_target < 0:
            raise InvalidInput("kappa_target must be nonnegative")

    @property
    def n(self):
        return self.M.shape[0]

    @property
    def p(self):
        return self.C1.shape[0]

    @property
    def q(self):
        return self.C2.shape[0]

    @property
    def C(self):
        return np.vstack([self.C1, self.C2])

    @property
    def J(self):
        return np.diag(np.concatenate([np.ones(self.p), -np.ones(self.q)])).astype(complex)

    @property
    def kappa(self):
        return inertia(0.5 * (self.P + self.P.conj().T)).n_minus

    @property
    def target(self):
        return self.kappa if self.kappa_target is None else self.kappa_target

    def stein_residual(self):
        M, N, C1, C2, P = self.M, self.N, self.C1, self.C2, self.P
        D = M.conj().T @ P @ M - N.conj().T @ P @ N - C1.conj().T @ C1 + C2.conj().T @ C2
        return float(np.linalg.norm(D, 2))

    def resolvent(self, lam):
        """``(M - lam N)^{-1}``; raises :class:`PencilSingular`."""
        A = self.M - complex(lam) * self.N
        sv = np.linalg.svd(A, compute_uv=False)
        if sv[-1] <= PENCIL_TOL * max(1.0, sv[0]):
            raise PencilSingular(f"M - lam N is singular at lam={lam!r}", lam)
        return np.linalg.inv(A)


class Diagnostic(NamedTuple):
    code: str
    severity: str
    message: str
    value: float | None = None


@dataclass(frozen=True)
class ValidationResult:
    diagnostics: tuple
    kappa: int | None
    anchor: complex | None
    anchor_margin: float
    singular_points: tuple

    @property
    def ok(self):
        return not any(d.severity == "error" for d in self.diagnostics)

    @property
    def codes(self):
        return tuple(d.code for d in self.diagnostics if d.severity == "error")


def _smallest_sv(A):
    return float(np.linalg.svd(A, compute_uv=False)[-1])


def pencil_is_singular(data, n_probe=5, seed=0):
    """``det(M - lam N)`` vanishes identically (checked at random points)."""
    rng = np.random.default_rng(seed)
    scale = _scale(data.M, data.N)
    for _ in range(n_probe):
        lam = complex(*rng.standard_normal(2))
        if _smallest_sv(data.M - lam * data.N) > 1e-10 * scale * max(1.0, abs(lam)):
            return False
    return True


def pencil_eigenvalues(data):
    """Finite generalized eigenvalues of ``(M, N)`` in the closed disk."""
    if data.n == 0 or pencil_is_singular(data):
        return ()
    ev = scipy.linalg.eigvals(data.M, data.N)
    ev = ev[np.isfinite(ev)]
    ev = ev[np.abs(ev) <= 1 + 1e-12]
    order = np.lexsort((np.round(np.angle(ev), 12), np.round(np.abs(ev), 12)))
    return tuple(complex(z) for z in ev[order])


def choose_anchor(data, n_candidates=N_ANCHORS):
    """Circle point maximizing the smallest singular value of ``M - aN``."""
    a = np.exp(2j * np.pi * np.arange(n_candidates) / n_candidates)
    sv = np.linalg.svd(data.M[None] - a[:, None, None] * data.N[None], compute_uv=False)[:, -1]
    k = int(np.argmax(sv))
    return complex(a[k]), float(sv[k])


def validate(data):
    """Check the four standing assumptions; returns a :class:`ValidationResult`.

    Codes: ``A1`` (``P`` not Hermitian or singular), ``A2`` (identity
    residual), ``A3`` (no regular anchor on the circle), ``A4`` (the pencil
    is singular, so its singular set is not discrete).
    """
    diags = []
    kappa = None
    P = data.P
    scale_p = _scale(P)
    if hermitian_defect(P) > HERMITIAN_TOL * scale_p:
        diags.append(Diagnostic("A1", "error", "P is not Hermitian", hermitian_defect(P)))
    else:
        sp = _smallest_sv(P) if data.n else 1.0
        if sp <= ZERO_TOL * scale_p:
            diags.append(Diagnostic("A1", "error", "P is singular", sp))
        else:
            kappa = data.kappa
            diags.append(Diagnostic("A1", "info", f"P invertible with {kappa} negative eigenvalues", sp))
    scale = _scale(data.M, data.N, data.C1, data.C2) ** 2 * scale_p
    r = data.stein_residual()
    if r > STEIN_TOL * scale:
        diags.append(Diagnostic("A2", "error", "Stein identity fails", r))
    else:
        diags.append(Diagnostic("A2", "info", "Stein identity holds", r))
    singular = pencil_is_singular(data) if data.n else False
    anchor, margin = None, 0.0
    if data.anchor is not None:
        a = complex(data.anchor)
        m = _smallest_sv(data.M - a * data.N) if data.n else 1.0
        if abs(abs(a) - 1) > 1e-12:
            diags.append(Diagnostic("A3", "error", "anchor is not on the unit circle", abs(a)))
        elif m <= PENCIL_TOL * _scale(data.M, data.N):
            diags.append(Diagnostic("A3", "error", "M - aN is singular at the given anchor", m))
        else:
            anchor, margin = a, m
    elif data.n:
        a, m = choose_anchor(data)
        if m <= PENCIL_TOL * _scale(data.M, data.N):
            diags.append(Diagnostic("A3", "error", "no circle point with M - aN invertible", m))
        else:
            anchor, margin = a, m
    else:
        anchor, margin = 1.0 + 0j, 1.0
    if anchor is not None:
        diags.append(Diagnostic("A3", "info", "anchor found", margin))
    points = ()
    if singular:
        diags.append(Diagnostic("A4", "error", "pencil M - lam N is singular for every lam"))
    else:
        points = pencil_eigenvalues(data)
        diags.append(Diagnostic("A4", "info", f"{len(points)} pencil singular points in the closed disk",
                                float(len(points))))
    if kappa is not None and data.kappa_target is not None and data.kappa_target < kappa:
        diags.append(Diagnostic("KAPPA", "error",
                                f"target index {data.kappa_target} is below sq_-(P) = {kappa}"))
    return ValidationResult(tuple(diags), kappa, anchor, margin, points)


class Isometry(NamedTuple):
    domain: np.ndarray
    range: np.ndarray
    matrix: np.ndarray
    residual: float


def _grams(data):
    n, p, q = data.n, data.p, data.q
    S_in = np.eye(n + q, dtype=complex)
    S_in[:n, :n] = data.P
    S_out = np.eye(n + p, dtype=complex)
    S_out[:n, :n] = data.P
    return S_in, S_out


def build_isometry_v(data):
    """The isometry ``[Mf; C2 f] -> [Nf; C1 f]`` and its isometry residual."""
    D = np.vstack([data.M, data.C2])
    R = np.vstack([data.N, data.C1])
    V = R @ np.linalg.pinv(D)
    S_in, S_out = _grams(data)
    res = isometry_residual(V, GramSpace(S_in), GramSpace(S_out), domain=D)
    return Isometry(D, R, V, res)


class PencilCheck(NamedTuple):
    regular: bool
    block_rank_full: bool
    sigma_min: float
    decomposition_residual: float


def pencil_regularity(data, lam, tol=PENCIL_TOL, rng=None):
    """Regularity of ``lam`` for the pencil, checked two ways.

    ``regular`` tests ``M - lam N`` directly; ``block_rank_full`` tests
    that ``(I - lam P_H V) dom V`` and ``L_2`` together span
    ``H (+) L_2``.  When regular, a random vector is split along that
    decomposition and the reconstruction error is returned.
    """
    lam = complex(lam)
    n, q = data.n, data.q
    A = data.M - lam * data.N
    s_a = np.linalg.svd(A, compute_uv=False)
    regular = bool(s_a[-1] > tol * max(1.0, s_a[0])) if n else True
    # columns: (I - lam P_H V)[Mh; C2h] = [(M - lam N)h; C2 h] and [0; u]
    B = np.zeros((n + q, n + q), dtype=complex)
    B[:n, :n] = A
    B[n:, :n] = data.C2
    B[n:, n:] = np.eye(q)
    s_b = np.linalg.svd(B, compute_uv=False)
    full = bool(s_b[-1] > tol * max(1.0, s_b[0])) if n + q else True
    resid = float("nan")
    if regular:
        rng = rng if rng is not None else np.random.default_rng(0)
        x = rng.standard_normal(n + q) + 1j * rng.standard_normal(n + q)
        h = np.linalg.solve(A, x[:n])
        u = x[n:] - data.C2 @ h
        recon = np.concatenate([A @ h, data.C2 @ h + u])
        resid = float(np.linalg.norm(recon - x) / np.linalg.norm(x))
    return PencilCheck(regular, full, float(s_a[-1]) if n else 1.0, resid)


def skew_projection(data, lam):
    """``P(lam)[f; v] = v - C2 (M - lam N)^{-1} f`` as a ``q x (n+q)`` matrix."""
    R = data.resolvent(lam)
    return np.hstack([-data.C2 @ R, np.eye(data.q)])


def q_l1(data, lam):
    """``Q_{L_1}(lam)[f; v] = C1 (M - lam N)^{-1} f``."""
    R = data.resolvent(lam)
    return np.hstack([data.C1 @ R, np.zeros((data.p, data.q))])


def g_operator(data, lam):
    """``G(lam)[f; v] = C (M - lam N)^{-1} f``."""
    R = data.resolvent(lam)
    return np.hstack([data.C @ R, np.zeros((data.p + data.q, data.q))])


def g_cross(data, lam):
    """Adjoint of :func:`g_operator` for the Gram ``P (+) I_q``."""
    S_in, _ = _grams(data)
    return np.linalg.solve(S_in, g_operator(data, lam).conj().T)


class ResolventMatrix:
    """``W(lam) = I - (1 - lam conj(a)) C (M - lam N)^{-1} P^{-1} (M - aN)^{-*} C^* J``."""

    def __init__(self, data, anchor):
        a = complex(anchor)
        if abs(abs(a) - 1) > 1e-12:
            raise InvalidInput(f"anchor {a!r} is not on the unit circle")
        self.data = data
        self.anchor = a
        self.J = data.J
        Ra = data.resolvent(a)
        self.K = np.linalg.solve(data.P, Ra.conj().T @ data.C.conj().T) @ self.J

    @property
    def m(self):
        return self.data.p + self.data.q

    def __call__(self, lam):
        lam = complex(lam)
        R = self.data.resolvent(lam)
        return np.eye(self.m) - (1 - lam * np.conj(self.anchor)) * self.data.C @ R @ self.K

    evaluate = __call__

    def blocks(self, lam):
        W = self(lam)
        p = self.data.p
        return W[:p, :p], W[:p, p:], W[p:, :p], W[p:, p:]

    def identity_residual(self, lam, mu):
        """``||J - W(lam) J W(mu)^* - (1 - lam conj(mu)) G(lam) G(mu)^x||``."""
        d = self.data
        lhs = self.J - self(lam) @ self.J @ self(mu).conj().T
        GG = d.C @ d.resolvent(lam) @ np.linalg.solve(d.P, d.resolvent(mu).conj().T @ d.C.conj().T)
        rhs = (1 - complex(lam) * np.conj(mu)) * GG
        return float(np.linalg.norm(lhs - rhs, 2))

    def as_function(self):
        """Realization of ``W``, available when ``M`` is invertible."""
        d = self.data
        try:
            Mi = d.resolvent(0.0)
        except PencilSingular:
            return None
        A = Mi @ d.N
        B0 = Mi @ self.K
        n = d.n
        return RationalMatrixFunction(A, B0, -d.C @ (A - np.conj(self.anchor) * np.eye(n)),
                                      np.eye(self.m) - d.C @ B0)


def resolvent_matrix(data, a=None):
    if a is None:
        a = data.anchor if data.anchor is not None else choose_anchor(data)[0]
    return ResolventMatrix(data, a)


class PotapovCheck(NamedTuple):
    kappa_hat: int
    stabilized: bool
    kerpen_ok: bool
    consistent: bool


def _regular_disk_points(data, rng, count, radius=0.95):
    avoid = pencil_eigenvalues(data)
    pts = []
    while len(pts) < count:
        z = random_disk_points(rng, 1, radius, avoid, margin=0.05)[0]
        if pencil_regularity(data, z).regular:
            pts.append(z)
    return pts


def potapov_kernel(W):
    J = W.J
    avoid = pencil_eigenvalues(W.data)

    def K(lam, omega):
        return (J - W(lam) @ J @ W(omega).conj().T) / (1 - lam * np.conj(omega))

    return KernelEvaluator(K, W.m, 1.0, avoid, 1e-6)


def check_potapov_class(W, samples=None, seed=0, n_samples=48):
    """Sampled negative squares of the Potapov kernel of ``W`` and the
    kernel condition ``cap ker C (M - lam N)^{-1} = 0`` over the samples.
    """
    data = W.data
    rng = np.random.default_rng(seed)
    pts = list(samples) if samples is not None else _regular_disk_points(data, rng, n_samples)
    est = negative_squares_estimate(potapov_kernel(W), pts)
    stack = np.vstack([data.C @ data.resolvent(z) for z in pts]) if data.n else np.zeros((0, 0))
    kerpen = bool(np.linalg.matrix_rank(stack, tol=1e-9 * _scale(stack)) == data.n) if data.n else True
    kappa = data.kappa
    consistent = est.count <= kappa and (not (est.stabilized and kerpen) or est.count == kappa)
    return PotapovCheck(est.count, est.stabilized, kerpen, consistent)


def circle_samples(count, offset=0.5):
    return np.exp(2j * np.pi * (np.arange(count) + offset) / count)


def check_j_inner(W, circle_points=None):
    """Max of ``||J - W(t) J W(t)^*||`` over circle points; returns ``(defect, skipped)``."""
    pts = circle_samples(100) if circle_points is None else circle_points
    worst, skipped = 0.0, 0
    for t in pts:
        try:
            Wt = W(t)
        except PencilSingular:
            skipped += 1
            continue
        worst = max(worst, float(np.linalg.norm(W.J - Wt @ W.J @ Wt.conj().T, 2)))
    return worst, skipped


# ---------------------------------------------------------------------------
# solutions


def _as_parameter(eps, p, q):
    if isinstance(eps, RationalMatrixFunction):
        f = eps
    else:
        E = np.asarray(eps, dtype=complex)
        if E.ndim == 0:
            E = E * np.eye(p, q)
        f = RationalMatrixFunction.constant(_mat(E, p, q, "epsilon"))
    if (f.p, f.q) != (p, q):
        raise InvalidInput(f"parameter has shape {(f.p, f.q)}, expected {(p, q)}")
    return f


def _blocks(f, p):
    """Realizations of the four blocks of a ``(p+q) x (p+q)`` function."""
    out = []
    for rows in (slice(0, p), slice(p, None)):
        for cols in (slice(0, p), slice(p, None)):
            out.append(RationalMatrixFunction(f.T, f.F[:, cols], f.G[rows], f.H[rows, cols], f.shift))
    return out


@dataclass
class LftSolution:
    """``s = (w11 e + w12)(w21 e + w22)^{-1}``, evaluated pointwise.

    ``realization`` is a (reduced) state-space form of ``s`` when one is
    available; it is needed for Krein-Langer data when ``s`` has poles.
    """

    W: ResolventMatrix
    epsilon: RationalMatrixFunction
    admissible: bool
    denominator_margin: float
    realization: RationalMatrixFunction | None = None

    @property
    def p(self):
        return self.W.data.p

    @property
    def q(self):
        return self.W.data.q

    def __call__(self, lam):
        lam = complex(lam)
        w11, w12, w21, w22 = self.W.blocks(lam)
        e = self.epsilon(lam)
        den = w21 @ e + w22
        sv = np.linalg.svd(den, compute_uv=False)
        if sv[-1] <= 1e-12 * max(1.0, sv[0]):
            raise DomainError(f"denominator singular at {lam!r}", lam)
        return np.linalg.solve(den.T, (w11 @ e + w12).T).T

    evaluate = __call__

    def disk_poles(self):
        if self.realization is None:
            return np.zeros(0, dtype=complex)
        return self.realization.disk_poles()


def lft_solve(data_or_W, epsilon, anchor=None, check_schur=True, realize=True):
    """Linear fractional transform of a Schur class parameter.

    Parameters
    ----------
    data_or_W : AipData or ResolventMatrix
    epsilon : RationalMatrixFunction or array_like
        Parameter in the Schur class; a scalar ``c`` means ``c I``.
    check_schur : bool
        Run :func:`schur_membership` on the parameter first.

    Returns
    -------
    LftSolution
        With ``admissible`` false when ``w21(0) e(0) + w22(0)`` is singular.
    """
    W = data_or_W if isinstance(data_or_W, ResolventMatrix) else resolvent_matrix(data_or_W, anchor)
    p, q = W.data.p, W.data.q
    eps = _as_parameter(epsilon, p, q)
    if check_schur and not schur_membership(eps).is_schur:
        raise InvalidInput("parameter is not in the Schur class")
    try:
        _, _, w21, w22 = W.blocks(0.0)
        den0 = w21 @ eps(0.0) + w22
        sv = np.linalg.svd(den0, compute_uv=False)
        margin = float(sv[-1] / max(1.0, sv[0]))
    except (PencilSingular, DomainError):
        margin = 0.0
    admissible = margin > 1e-10
    real = None
    if admissible and realize:
        Wf = W.as_function()
        if Wf is not None:
            w11, w12, w21f, w22f = _blocks(Wf, p)
            num = w11 @ eps + w12
            den = w21f @ eps + w22f
            real = (num @ den.inverse()).normalized().minimal()
    return LftSolution(W, eps, admissible, margin, real)


def inverse_lft(W, s_value, lam):
    """Parameter value ``e = (w11 - s w21)^{-1} (s w22 - w12)`` at ``lam``."""
    w11, w12, w21, w22 = W.blocks(lam)
    S = np.atleast_2d(s_value)
    return np.linalg.solve(w11 - S @ w21, S @ w22 - w12)


def _eval(s, t):
    return np.atleast_2d(s(t))


def phi_map(data, s, t):
    """``Phi(t) = [[I, -s(t)], [-s(t)^*, I]] C (M - tN)^{-1}``."""
    return delta_matrix(_eval(s, t)) @ data.C @ data.resolvent(t)


@dataclass
class SolutionReport:
    condition_ii_residual: float
    condition_i_margin: float | None
    condition_i_skipped: bool
    quadrature_caveat: bool
    parseval_gap: float | None
    kappa_hat: int
    kappa_stabilized: bool
    membership_residuals: tuple
    schur_kernel_ok: bool
    accepted: bool
    grid: int
    skipped_nodes: int
    epsilon: dict = field(default_factory=dict)
    reasons: tuple = ()

    def as_dict(self):
        out = dict(self.__dict__)
        out["membership_residuals"] = list(self.membership_residuals)
        out["reasons"] = list(self.reasons)
        return out


def _phi_columns(space, data, phi, s):
    nodes = space.grid.nodes
    vals = np.zeros((space.grid.N, data.p + data.q, data.n), dtype=complex)
    for k, t in enumerate(nodes):
        if not space.ok[k]:
            continue
        try:
            vals[k] = phi(t) if phi is not None else phi_map(data, s, t)
        except (PencilSingular, DomainError):
            space.ok[k] = False
    from .hardy import BoundaryFunction
    return [BoundaryFunction(space.grid, vals[:, :, j], data.p) for j in range(data.n)]


def verify_solution(data, s, epsilon_meta=None, phi=None, grid=None, seed=0,
                    n_condition_points=100, tol=1e-6):
    """Check a candidate solution ``s`` (and optionally an external ``Phi``).

    Condition (ii) is checked at ``n_condition_points`` circle points;
    condition (i) is the smallest eigenvalue of ``P - Gram`` where
    ``Gram[i, j] = [Phi e_j, Phi e_i]`` in ``D(s)``; the Parseval gap is
    ``||P - Gram||``.  Membership of the columns of ``Phi`` in ``D(s)`` and
    the sampled index of the Schur kernel of ``s`` are reported too.
    """
    grid = grid if isinstance(grid, CircleGrid) else CircleGrid(grid or DEFAULT_GRID)
    reasons = []
    # (ii)
    C = data.C
    worst = 0.0
    for t in circle_samples(n_condition_points):
        try:
            Ph = phi(t) if phi is not None else phi_map(data, s, t)
            Dl = delta_matrix(_eval(s, t))
        except (PencilSingular, DomainError):
            continue
        r = Ph @ data.M - t * Ph @ data.N - Dl @ C
        worst = max(worst, float(np.linalg.norm(r, 2)) / max(1.0, float(np.linalg.norm(Dl @ C, 2))))
    if worst > 1e-9:
        reasons.append("condition (ii)")
    # Schur kernel index
    real = getattr(s, "realization", None)
    target = s if isinstance(s, RationalMatrixFunction) else real
    poles = target.disk_poles() if target is not None else ()
    K = schur_kernel_evaluator(s, tuple(complex(z) for z in poles))
    est = estimate_kernel_signature(K, seed=seed)
    kappa_target = data.target
    if est.count > kappa_target:
        reasons.append("kernel index above target")
    # (i) and membership via D(s)
    kappa_s = len(poles)
    margin = gap = None
    skipped = False
    caveat = kappa_s > 0
    mem = (float("nan"),) * 3
    n_skipped = 0
    dbr_source = target if target is not None else s
    if kappa_s > 0 and target is None:
        skipped = True
    else:
        try:
            space = DBRSpace(dbr_source, grid, seed=seed)
        except Exception as exc:  # report, do not crash
            LOGGER.warning("D(s) construction failed: %s", exc)
            skipped = True
            reasons.append(f"D(s) construction failed: {type(exc).__name__}")
        else:
            cols = _phi_columns(space, data, phi, s)
            n_skipped = int(np.sum(~space.ok))
            gram = space.gram(cols) if cols else np.zeros((0, 0))
            gram = 0.5 * (gram + gram.conj().T)
            diff = data.P - gram
            margin = float(np.min(np.linalg.eigvalsh(diff))) if data.n else 0.0
            gap = float(np.linalg.norm(diff, 2)) if data.n else 0.0
            res = [space.membership(f, tol).residuals for f in cols]
            mem = tuple(float(max(r[i] for r in res)) for i in range(3)) if res else (0.0,) * 3
            if any(r > tol for r in mem):
                reasons.append("D(s) membership")
            if not caveat and margin < -tol:
                reasons.append("condition (i)")
    return SolutionReport(
        condition_ii_residual=worst, condition_i_margin=margin, condition_i_skipped=skipped,
        quadrature_caveat=caveat, parseval_gap=gap, kappa_hat=est.count,
        kappa_stabilized=est.stabilized, membership_residuals=mem,
        schur_kernel_ok=est.count <= kappa_target, accepted=not reasons, grid=grid.N,
        skipped_nodes=n_skipped, epsilon=dict(epsilon_meta or {}), reasons=tuple(reasons))


# ---------------------------------------------------------------------------
# instances


def encode_nevanlinna_pick(nodes, values, check=True):
    """Scalar Nevanlinna-Pick data as an :class:`AipData`.

    ``M = I``, ``N = diag(conj z)``, ``C1 = [1 ... 1]``, ``C2 = conj(w)`` and
    ``P`` the Pick matrix ``(1 - w_j conj w_k) / (1 - z_j conj z_k)``.
    """
    z = np.asarray(nodes, dtype=complex).reshape(-1)
    w = np.asarray(values, dtype=complex).reshape(-1)
    if z.size != w.size:
        raise InvalidInput("nodes and values differ in length")
    if np.any(np.abs(z) >= 1):
        raise InvalidInput("nodes must lie in the open unit disk")
    if len(set(np.round(z, 14))) != z.size:
        raise InvalidInput("nodes must be distinct")
    P = (1 - np.outer(w, w.conj())) / (1 - np.outer(z, z.conj()))
    if check and z.size and _smallest_sv(P) <= ZERO_TOL * _scale(P):
        raise DeterminateCase("Pick matrix is singular")
    n = z.size
    return AipData(np.eye(n), np.diag(z.conj()), np.ones((1, n)), w.conj().reshape(1, n), P)


def random_instance(rng, n, p, q, kappa=0, spectral_radius=0.9, max_tries=500):
    """Random valid data with ``sq_-(P) = kappa``.

    ``P0`` solves the Stein equation ``P0 - A^* P0 A = C1^* C1 - C2^* C2``
    for a random stable ``A``; random invertible ``Y, Z`` then give
    ``M = YZ``, ``N = YAZ``, ``C = C0 Z`` and ``P = Y^{-*} P0 Y^{-1}``.
    """
    for _ in range(max_tries):
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A *= spectral_radius * rng.uniform(0.3, 1.0) / max(np.abs(np.linalg.eigvals(A)))
        C1 = rng.standard_normal((p, n)) + 1j * rng.standard_normal((p, n))
        C2 = (rng.standard_normal((q, n)) + 1j * rng.standard_normal((q, n))) * rng.uniform(0.2, 1.5)
        Q = C1.conj().T @ C1 - C2.conj().T @ C2
        P0 = scipy.linalg.solve_discrete_lyapunov(A.conj().T, Q)
        P0 = 0.5 * (P0 + P0.conj().T)
        ev = np.linalg.eigvalsh(P0)
        if np.sum(ev < 0) != kappa or np.min(np.abs(ev)) < 1e-3 * np.max(np.abs(ev)):
            continue
        Y = np.eye(n) + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
        Z = np.eye(n) + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
        if np.linalg.cond(Y) > 20 or np.linalg.cond(Z) > 20:
            continue
        Yi = np.linalg.inv(Y)
        P = Yi.conj().T @ P0 @ Yi
        data = AipData(Y @ Z, Y @ A @ Z, C1 @ Z, C2 @ Z, 0.5 * (P + P.conj().T))
        if validate(data).ok:
            return data
    raise RuntimeError("could not draw a valid instance")


# ---------------------------------------------------------------------------
# unitary extensions


def _signature_basis(S, cols, tol=1e-10):
    """Basis ``E`` of ``ran cols`` with ``E^* S E`` = diag(+1..., -1...)."""
    if cols.shape[1] == 0:
        return cols, np.zeros(0)
    Q, _ = np.linalg.qr(cols)
    Gm = Q.conj().T @ S @ Q
    w, V = np.linalg.eigh(0.5 * (Gm + Gm.conj().T))
    if np.min(np.abs(w)) <= tol * max(1.0, np.max(np.abs(w))):
        raise ExtensionInfeasible("defect subspace is degenerate")
    order = np.argsort(-np.sign(w), kind="stable")
    w, V = w[order], V[:, order]
    E = Q @ V / np.sqrt(np.abs(w))
    return E, np.sign(w)


def defect_spaces(data, enlargement=0):
    """Indefinite orthogonal complements of ``dom V`` and ``ran V``.

    Returns ``(E_in, sig_in, E_out, sig_out, D, R, S_in, S_out)`` for the
    state space enlarged by ``enlargement`` Hilbert directions.
    """
    n, p, q, e = data.n, data.p, data.q, enlargement
    if e < 0:
        raise InvalidInput("enlargement must be nonnegative")
    Pe = np.eye(n + e, dtype=complex)
    Pe[:n, :n] = data.P
    S_in = scipy.linalg.block_diag(Pe, np.eye(q))
    S_out = scipy.linalg.block_diag(Pe, np.eye(p))
    D = np.vstack([data.M, np.zeros((e, n)), data.C2])
    R = np.vstack([data.N, np.zeros((e, n)), data.C1])
    Gd = D.conj().T @ S_in @ D
    if data.n and _smallest_sv(Gd) <= ZERO_TOL * _scale(Gd):
        raise ExtensionInfeasible("dom V is a degenerate subspace")
    E_in, sig_in = _signature_basis(S_in, scipy.linalg.null_space(D.conj().T @ S_in))
    E_out, sig_out = _signature_basis(S_out, scipy.linalg.null_space(R.conj().T @ S_out))
    return E_in, sig_in, E_out, sig_out, D, R, S_in, S_out


class Extension(NamedTuple):
    colligation: Colligation
    extension_residual: float
    minimal: bool
    regular: bool
    n: int

    def phi(self, t):
        """``Phi(t)`` of the extension: the Fourier representation on ``H``."""
        return fourier_matrix(self.colligation, t)[:, : self.n]


def random_coupling(rng, signature):
    """Random matrix unitary for ``diag(signature)``."""
    m = len(signature)
    K = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    K = (K + K.conj().T) / 2
    return scipy.linalg.expm(1j * np.asarray(signature)[:, None] * K)


def build_unitary_extension(data, coupling=None, enlargement=0):
    """Unitary colligation extending ``V`` through a coupling of defect spaces.

    The coupling maps the defect of ``dom V`` onto the defect of
    ``ran V`` and must be unitary for their signature matrices (in the
    bases of :func:`defect_spaces`).  ``None`` means the identity.

    Raises
    ------
    ExtensionInfeasible
        When ``p != q`` (no square unitary operator exists) or the defect
        signatures differ.
    """
    if data.p != data.q:
        raise ExtensionInfeasible("unitary extensions need equal channel dimensions p = q", None)
    E_in, sig_in, E_out, sig_out, D, R, S_in, S_out = defect_spaces(data, enlargement)
    if not np.array_equal(sig_in, sig_out):
        need = int(abs(np.sum(sig_in < 0) - np.sum(sig_out < 0)))
        raise ExtensionInfeasible("defect signatures differ", need)
    k = E_in.shape[1]
    Cc = np.eye(k, dtype=complex) if coupling is None else _mat(coupling, k, k, "coupling")
    Sg = np.diag(sig_in)
    if np.linalg.norm(Cc.conj().T @ Sg @ Cc - Sg, 2) > 1e-10 * max(1.0, np.linalg.norm(Cc, 2)) ** 2:
        raise InvalidInput("coupling is not unitary for the defect signature")
    U = np.hstack([R, E_out @ Cc]) @ np.linalg.inv(np.hstack([D, E_in]))
    m = data.n + enlargement
    Pe = S_in[:m, :m]
    coll = Colligation(Pe, U[:m, :m], U[:m, m:], U[m:, :m], U[m:, m:], tol=1e-9)
    ext_res = float(np.linalg.norm(U @ D - R, 2))
    simple, rank, _ = is_simple(coll)
    regular = simple
    if not simple:
        # the complement of the simple part must be a Hilbert space
        K = _controllability(coll)
        Qk = scipy.linalg.orth(K) if K.size else np.zeros((m, 0))
        comp = scipy.linalg.null_space(Qk.conj().T @ Pe) if Qk.shape[1] else np.eye(m)
        regular = inertia(comp.conj().T @ Pe @ comp).n_minus == 0 if comp.shape[1] else True
    return Extension(coll, ext_res, simple, regular, data.n)


def _controllability(c):
    Tx, Gx = c.adjoint_blocks()
    blocks, A, B = [], c.F, Gx
    for _ in range(c.d):
        blocks.extend([A, B])
        A, B = c.T @ A, Tx @ B
    return np.hstack(blocks) if blocks else np.zeros((c.d, 0))
