import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from aipkit.colligation import (Colligation, characteristic_function, check_kernel_factorization,
                                ds_kernel, fourier_matrix, functional_model, is_simple,
                                random_colligation)
from aipkit.errors import DomainError, InvalidInput, NotSimple
from aipkit.pontryagin import KernelEvaluator, estimate_kernel_signature, kernel_gram
from aipkit.ratfun import RationalMatrixFunction, schur_membership


def swap():
    return Colligation([[1.0]], [[0.0]], [[1.0]], [[1.0]], [[0.0]])


def ds_oracle(s, mu, lam):
    """Block kernel from plain difference quotients of sampled values."""
    sl, sm = np.atleast_2d(s(lam)), np.atleast_2d(s(mu))
    p = sl.shape[0]
    dq = (sl - sm) / (lam - mu)
    K = np.zeros((2 * p, 2 * p), dtype=complex)
    K[:p, :p] = (np.eye(p) - sl @ sm.conj().T) / (1 - lam * np.conj(mu))
    K[:p, p:] = -mu * dq
    K[p:, :p] = -np.conj(lam) * dq.conj().T
    K[p:, p:] = np.conj(lam) * mu * (np.eye(p) - sl.conj().T @ sm) / (1 - np.conj(lam) * mu)
    return K


def test_swap_colligation_gives_lam():
    c = swap()
    s = characteristic_function(c)
    for z in (0.0, 0.5j, -0.3 + 0.2j):
        assert_allclose(s(z), [[z]], atol=1e-15)
    assert is_simple(c)[0]


def test_non_unitary_rejected():
    with pytest.raises(InvalidInput):
        Colligation([[1.0]], [[0.5]], [[1.0]], [[1.0]], [[0.0]])


@pytest.mark.parametrize("seed", range(5))
def test_value_at_zero_and_unitarity(seed):
    rng = np.random.default_rng(seed)
    c = random_colligation(rng, 3, 2, kappa=seed % 3)
    assert c.residual < 1e-10
    assert c.kappa_state == seed % 3
    assert_allclose(characteristic_function(c)(0.0), c.H, atol=1e-15)
    Ux = c.u_cross()
    assert_allclose(Ux @ c.U, np.eye(c.d + c.q), atol=1e-10)


def test_hilbert_state_gives_schur_function():
    c = random_colligation(np.random.default_rng(4), 3, 2, kappa=0)
    assert schur_membership(characteristic_function(c)).is_schur


def test_is_simple_detects_decoupled_block():
    c = swap()
    # append a unitary state block that never meets the input or output
    T = np.array([[0.0, 0.0], [0.0, 1j]])
    big = Colligation(np.eye(2), T, [[1.0], [0.0]], [[1.0, 0.0]], [[0.0]])
    simple, rank, defect = is_simple(big)
    assert not simple and rank == 1 and defect == 1
    with pytest.raises(NotSimple):
        functional_model(big)
    assert is_simple(c) == (True, 1, 0)


def test_ds_kernel_zero_function():
    s = RationalMatrixFunction.constant([[0.0]])
    mu, lam = 0.2 + 0.1j, -0.3j
    K = ds_kernel(s, mu, lam)
    expected = np.diag([1 / (1 - lam * np.conj(mu)), np.conj(lam) * mu / (1 - np.conj(lam) * mu)])
    assert_allclose(K, expected, atol=1e-15)
    with pytest.raises(DomainError):
        ds_kernel(s, 1.0, 1.0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_ds_kernel_matches_difference_quotients_and_is_hermitian(seed):
    rng = np.random.default_rng(seed)
    c = random_colligation(rng, 2, 1, kappa=int(rng.integers(0, 3)))
    s = characteristic_function(c)
    mu, lam = (complex(*rng.uniform(-0.6, 0.6, 2)) for _ in range(2))
    if abs(mu - lam) < 1e-2:
        lam += 0.1
    try:
        K = ds_kernel(s, mu, lam)
        oracle = ds_oracle(s, mu, lam)
    except DomainError:
        return
    assert_allclose(K, oracle, rtol=1e-8, atol=1e-8 * max(1, np.abs(oracle).max()))
    assert_allclose(ds_kernel(s, lam, mu), K.conj().T, atol=1e-9 * max(1, np.abs(K).max()))


def test_ds_kernel_diagonal_is_limit():
    c = random_colligation(np.random.default_rng(8), 2, 1, kappa=1)
    s = characteristic_function(c)
    mu = 0.3 - 0.1j
    assert_allclose(ds_kernel(s, mu, mu), ds_oracle(s, mu, mu + 1e-7), atol=1e-5)


@pytest.mark.parametrize("seed", range(6))
def test_kernel_factorization(seed):
    rng = np.random.default_rng(50 + seed)
    c = random_colligation(rng, int(rng.integers(1, 5)), int(rng.integers(1, 3)), kappa=seed % 2)
    pairs = [(complex(*rng.uniform(-0.6, 0.6, 2)), complex(*rng.uniform(-0.6, 0.6, 2))) for _ in range(20)]
    assert check_kernel_factorization(c, pairs, rng) <= 1e-9
    # matrix form of the reproducing identity
    mu, lam = pairs[0]
    Fm, Fl = fourier_matrix(c, mu), fourier_matrix(c, lam)
    K = Fl @ np.linalg.solve(c.gram, Fm.conj().T)
    assert_allclose(K, ds_kernel(characteristic_function(c), mu, lam), atol=1e-9)


@pytest.mark.parametrize("seed", range(6))
def test_functional_model_is_unitarily_equivalent(seed):
    rng = np.random.default_rng(200 + seed)
    c = random_colligation(rng, int(rng.integers(1, 5)), int(rng.integers(1, 3)), kappa=min(seed % 3, 1))
    fm = functional_model(c, seed=seed)
    assert fm.uniteq_residual <= 1e-9
    assert fm.eft_residual <= 1e-9
    assert_allclose(fm.colligation.U, c.U, atol=1e-8)


@pytest.mark.parametrize("kappa", [0, 1, 2])
def test_ds_kernel_negative_squares_equal_state_index(kappa):
    rng = np.random.default_rng(300 + kappa)
    c = random_colligation(rng, 3, 1, kappa=kappa)
    s = characteristic_function(c)
    K = KernelEvaluator(lambda l, w: ds_kernel(s, w, l), 2, excluded=tuple(s.disk_poles()), margin=1e-3)
    est = estimate_kernel_signature(K, seed=kappa)
    assert est.stabilized and est.count == kappa
    # a Gram of kernel sections is Hermitian
    pts = [0.1, -0.2j, 0.3 + 0.3j]
    G = kernel_gram(K, pts, [np.array([1.0, 0.0])] * 3)
    assert_allclose(G, G.conj().T, atol=1e-10)


def test_random_colligation_validates_kappa():
    with pytest.raises(InvalidInput):
        random_colligation(np.random.default_rng(0), 2, 1, kappa=3)
    c = random_colligation(np.random.default_rng(0), 2, 1, kappa=2)
    assert np.min(np.abs(np.abs(np.linalg.eigvals(c.T)) - 1)) >= 0.05


def test_functional_model_is_simple_and_factorization_degenerate_cases():
    c = random_colligation(np.random.default_rng(17), 3, 1, kappa=1)
    assert is_simple(functional_model(c).colligation)[0]
    assert check_kernel_factorization(c, [(0.0, 0.0)]) <= 1e-12
