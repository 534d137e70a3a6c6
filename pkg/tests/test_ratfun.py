import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from aipkit.errors import NotGeneralizedSchur, PoleError, UnsupportedPoleStructure, DomainError
from aipkit.pontryagin import estimate_kernel_signature
from aipkit.ratfun import (BlaschkePotapovProduct, RationalMatrixFunction, blaschke_factor_function,
                           bp_degree, bp_evaluate, delta_matrix, delta_pinv, hstack,
                           krein_langer_left, krein_langer_right, projection_onto, residue,
                           schur_kernel, schur_kernel_evaluator, schur_membership, vstack)

from _factories import cplx, random_generalized_schur, random_schur

Rmf = RationalMatrixFunction


def mobius(alpha):
    a = complex(alpha)
    return Rmf([[np.conj(a)]], [[1]], [[1 - abs(a) ** 2]], [[-a]])


def test_constant_and_identity_shift():
    H = np.array([[1.0, 2.0]])
    f = Rmf.constant(H)
    assert_allclose(f(0.3 + 0.1j), H)
    lam = Rmf.lam()
    assert_allclose(lam(0.4j), [[0.4j]])


def test_mobius_realization_matches_formula():
    rng = np.random.default_rng(0)
    alpha = 0.3 - 0.5j
    f = mobius(alpha)
    assert_allclose(f(0), [[-alpha]], atol=0)
    for z in rng.uniform(-0.9, 0.9, 100) + 1j * rng.uniform(-0.4, 0.4, 100):
        assert abs(f(z)[0, 0] - (z - alpha) / (1 - np.conj(alpha) * z)) <= 1e-12


def test_pole_error_carries_point():
    f = Rmf([[2.0]], [[1.0]], [[1.0]], [[0.0]])
    with pytest.raises(PoleError) as exc:
        f(0.5)
    assert exc.value.point == 0.5
    vals, ok = f.evaluate_many([0.5, 0.1])
    assert not ok[0] and ok[1]
    assert np.isnan(vals[0]).all()


def test_inverse_lam_and_poles():
    f = Rmf.inverse_lam()
    assert_allclose(f(0.25), [[4.0]])
    with pytest.raises(PoleError):
        f(0)
    assert_allclose(f.disk_poles(), [0.0])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_algebra_is_pointwise(seed):
    rng = np.random.default_rng(seed)
    f = Rmf(0.5 * cplx(rng, 2, 2), cplx(rng, 2, 2), cplx(rng, 2, 2), cplx(rng, 2, 2))
    g = Rmf(0.5 * cplx(rng, 1, 1), cplx(rng, 1, 2), cplx(rng, 2, 1), cplx(rng, 2, 2), shift=1)
    z = complex(*rng.uniform(-0.5, 0.5, 2))
    if abs(z) < 1e-3:
        z = 0.3
    for lhs, rhs in [((f @ g)(z), f(z) @ g(z)), ((f + g)(z), f(z) + g(z)),
                     ((f - g)(z), f(z) - g(z)), (f.times_lam()(z), z * f(z)),
                     (f.inverse()(z), np.linalg.inv(f(z))),
                     (f.minimal()(z), f(z)), (f.conj_reflect()(z), f(np.conj(z)).conj().T),
                     (hstack([f, g])(z), np.hstack([f(z), g(z)])),
                     (vstack([f, g])(z), np.vstack([f(z), g(z)]))]:
        assert_allclose(lhs, rhs, rtol=1e-8, atol=1e-8)


def test_divided_difference_and_derivative():
    f = mobius(0.4j) @ Rmf.inverse_lam()
    lam, mu = 0.3 + 0.2j, -0.1 + 0.5j
    assert_allclose(f.divided_difference(lam, mu), (f(lam) - f(mu)) / (lam - mu), rtol=1e-12)
    h = 1e-6
    fd = (f(lam + h) - f(lam - h)) / (2 * h)
    assert_allclose(f.derivative(lam), fd, rtol=1e-7)


def test_bp_single_factor_alpha_zero():
    b = BlaschkePotapovProduct(2, ((0.0, np.eye(2)),))
    assert_allclose(b(0.3j), 0.3j * np.eye(2))
    assert bp_degree(b) == 2


def test_bp_rank_one_factor_and_additivity():
    rng = np.random.default_rng(2)
    P1 = projection_onto(cplx(rng, 3, 1))
    P2 = projection_onto(cplx(rng, 3, 2))
    b1 = BlaschkePotapovProduct(3, ((0.2, P1),))
    b2 = BlaschkePotapovProduct(3, ((-0.5j, P2),))
    assert bp_degree(b1) == 1
    assert bp_degree(b1 @ b2) == bp_degree(b1) + bp_degree(b2)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_bp_unitary_on_circle(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4))
    factors = []
    for _ in range(int(rng.integers(1, 4))):
        a = 0.9 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
        factors.append((a, projection_onto(cplx(rng, m, int(rng.integers(1, m + 1))))))
    b = BlaschkePotapovProduct(m, tuple(factors))
    t = np.exp(2j * np.pi * rng.uniform())
    B = bp_evaluate(b, t)
    assert_allclose(B.conj().T @ B, np.eye(m), atol=1e-10)
    z = 0.5 * np.exp(1j)
    assert_allclose(b.as_function()(z), b(z), atol=1e-12)
    assert_allclose(b.inverse_function()(z), np.linalg.inv(b(z)), atol=1e-10)


def test_bp_rejects_bad_factors():
    from aipkit.errors import InvalidInput
    with pytest.raises(InvalidInput):
        BlaschkePotapovProduct(1, ((1.0, [[1]]),))
    with pytest.raises(InvalidInput):
        BlaschkePotapovProduct(2, ((0.1, [[1, 1], [0, 0]]),))


def test_schur_membership_examples():
    assert schur_membership(Rmf.constant([[0.0]])) == (True, 0.0, None)
    res = schur_membership(Rmf.lam())
    assert res.is_schur and res.worst_norm <= 1
    res = schur_membership(Rmf.inverse_lam())
    assert not res.is_schur and res.pole == 0
    assert not schur_membership(Rmf.constant([[1.01]])).is_schur


def test_schur_kernel_examples():
    assert_allclose(schur_kernel(Rmf.constant([[0.0]]), 0.2, 0.5j), [[1 / (1 - 0.2 * np.conj(0.5j))]])
    assert_allclose(schur_kernel(Rmf.inverse_lam(), 0.5, 0.5), [[-4.0]])
    f = random_schur(np.random.default_rng(5), 2)
    K1 = schur_kernel(f, 0.1 + 0.3j, -0.4)
    K2 = schur_kernel(f, -0.4, 0.1 + 0.3j)
    assert_allclose(K1.conj().T, K2, atol=1e-14)
    with pytest.raises(DomainError):
        schur_kernel(f, 1.0, 1.0)


def test_residue_simple_pole():
    f = Rmf.inverse_lam() + mobius(0.3).scaled(2.0)
    r1, r2 = residue(f, 0.0)
    assert_allclose(r1, [[1.0]], atol=1e-12)
    assert_allclose(r2, [[0.0]], atol=1e-12)


def test_kl_schur_input_trivial():
    f = random_schur(np.random.default_rng(7), 2)
    for kl in (krein_langer_left(f), krein_langer_right(f)):
        assert bp_degree(kl.blaschke_part) == 0
        z = 0.3 - 0.2j
        assert_allclose(kl.schur_part(z), f(z), atol=1e-12)


def test_kl_inverse_lam():
    f = Rmf.inverse_lam()
    for kl in (krein_langer_left(f), krein_langer_right(f)):
        assert kl.certified_degree == 1
        (alpha, P), = kl.blaschke_part.factors
        assert alpha == 0
        assert_allclose(P, [[1.0]])
        assert abs(abs(kl.schur_part(0.3)[0, 0]) - 1) < 1e-12
        assert kl.kernel_estimate == (1, True)


def test_kl_diagonal_example():
    f = Rmf(np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((2, 0)), np.diag([1.0, 0.0]), shift=1) \
        + Rmf.constant(np.diag([0.0, 0.5]))
    kl = krein_langer_left(f)
    assert kl.certified_degree == 1
    assert kl.rank_margin > 0.5
    assert kl.reconstruction_residual < 1e-12
    z = 0.4 + 0.1j
    bl = bp_evaluate(kl.blaschke_part, z)
    # b_l = diag(lam, 1) up to a left unitary
    assert_allclose(np.abs(np.linalg.svd(bl, compute_uv=False)), sorted([abs(z), 1.0], reverse=True))


def test_kl_rejects_double_pole():
    f = Rmf.inverse_lam() @ Rmf.inverse_lam()
    with pytest.raises(UnsupportedPoleStructure):
        krein_langer_left(f)


def test_kl_rejects_non_generalized_schur():
    f = Rmf.inverse_lam().scaled(1.0) + Rmf.constant([[2.0]])
    with pytest.raises(NotGeneralizedSchur):
        krein_langer_left(f)


@pytest.mark.parametrize("seed", range(4))
def test_kl_random_left_right_consistent(seed):
    rng = np.random.default_rng(100 + seed)
    m = int(rng.integers(1, 3))
    kappa = int(rng.integers(1, 3))
    f, b = random_generalized_schur(rng, m, kappa)
    left, right = krein_langer_left(f, seed), krein_langer_right(f, seed)
    assert left.certified_degree == right.certified_degree == kappa
    assert left.reconstruction_residual <= 1e-9 and right.reconstruction_residual <= 1e-9
    est = estimate_kernel_signature(schur_kernel_evaluator(f), seed=seed)
    assert est.stabilized and est.count == kappa


def test_delta_pinv_examples():
    f0 = Rmf.constant([[0.0]])
    assert_allclose(delta_pinv(f0, 1.0), np.eye(2), atol=1e-15)
    theta = 0.7
    fu = Rmf.constant([[np.exp(1j * theta)]])
    D = delta_matrix(fu(1.0))
    X = delta_pinv(fu, 1j)
    assert_allclose(D @ D, 2 * D, atol=1e-14)
    assert_allclose(X, D / 4, atol=1e-14)
    fc = Rmf.constant([[0.3 + 0.2j]])
    assert_allclose(delta_pinv(fc, -1.0), np.linalg.inv(delta_matrix(fc(0))), atol=1e-13)
    with pytest.raises(DomainError):
        delta_pinv(fc, 0.5)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_delta_pinv_penrose(seed):
    rng = np.random.default_rng(seed)
    p, q = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    S = cplx(rng, p, q)
    U, sv, Vh = np.linalg.svd(S, full_matrices=False)
    sv = np.minimum(sv / sv.max(), 1.0)
    sv[0] = 1.0  # at least one unimodular singular value
    f = Rmf.constant(U @ np.diag(sv) @ Vh)
    D = delta_matrix(f(1.0))
    X = delta_pinv(f, 1.0)
    for lhs, rhs in [(D @ X @ D, D), (X @ D @ X, X), ((D @ X).conj().T, D @ X), ((X @ D).conj().T, X @ D)]:
        assert_allclose(lhs, rhs, atol=1e-10)


def test_blaschke_factor_function_matches_product():
    rng = np.random.default_rng(9)
    P = projection_onto(cplx(rng, 2, 1))
    f = blaschke_factor_function(0.2 + 0.3j, P)
    b = BlaschkePotapovProduct(2, ((0.2 + 0.3j, P),))
    assert_allclose(f(0.5j), b(0.5j), atol=1e-14)
