import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from aipkit.colligation import characteristic_function, ds_kernel, random_colligation
from aipkit.errors import InvalidInput, KLConsistencyError, UnsupportedPoleStructure
from aipkit.pontryagin import inertia
from aipkit.hardy import (BoundaryFunction, CircleGrid, DBRSpace, adaptive_gram, build_gamma_r,
                          build_Xl, build_Xr, closed_form_residual, dbr_inner, dbr_membership,
                          model_space_basis, project_minus, project_plus)
from aipkit.ratfun import BlaschkePotapovProduct, RationalMatrixFunction

from _factories import cplx, random_bp

GRID = CircleGrid(256)
T = GRID.nodes


def bf(values, split=None, grid=GRID):
    return BoundaryFunction(grid, values, split)


def test_grid_nodes_are_roots_of_unity():
    assert_allclose(T ** GRID.N, np.ones(GRID.N), atol=1e-12)
    with pytest.raises(InvalidInput):
        CircleGrid(100)


def test_projection_examples():
    assert bf(T ** -1).norm() == pytest.approx(1.0)
    assert project_plus(bf(T ** -1)).norm() < 1e-15
    assert_allclose(project_plus(bf(T ** 2)).values[:, 0], T ** 2, atol=1e-13)
    g = 1 / (1 - T / 2)
    assert_allclose(project_plus(bf(g)).values[:, 0], g, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_projection_algebra(seed):
    rng = np.random.default_rng(seed)
    c = np.zeros((GRID.N, 2), dtype=complex)
    band = np.r_[0:20, GRID.N - 20:GRID.N]
    c[band] = cplx(rng, band.size, 2)
    f = bf(GRID.synthesize(c))
    pp, pm = project_plus(f), project_minus(f)
    assert_allclose((pp + pm).values, f.values, atol=1e-12)
    assert_allclose(project_plus(pp).values, pp.values, atol=1e-12)
    assert_allclose(project_minus(pm).values, pm.values, atol=1e-12)
    assert project_plus(pm).norm() < 1e-12


def test_model_space_trivial_and_monomials():
    assert model_space_basis(BlaschkePotapovProduct.identity(2), "analytic", GRID).dimension == 0
    b1 = BlaschkePotapovProduct(1, ((0.0, [[1]]),))
    B = model_space_basis(b1, "analytic", GRID)
    assert B.dimension == 1
    assert_allclose(B.basis[0].values[:, 0], np.ones(GRID.N), atol=1e-12)
    with pytest.raises(UnsupportedPoleStructure):
        model_space_basis(BlaschkePotapovProduct(1, ((0.0, [[1]]), (0.0, [[1]]))), "analytic", GRID)


def test_model_space_two_zeros_against_closed_form():
    b = BlaschkePotapovProduct(1, ((0.5, [[1]]), (-0.3j, [[1]])))
    for side in ("analytic", "coanalytic"):
        B = model_space_basis(b, side, GRID)
        assert B.dimension == 2
        assert closed_form_residual(B, b) < 1e-12


def test_model_space_lam_squared_span():
    # lam^2 itself has a repeated zero; a nearby product has model space within O(a) of span{1, t}
    b = BlaschkePotapovProduct(1, ((0.0, [[1]]), (1e-5, [[1]])))
    B = model_space_basis(b, "analytic", GRID)
    for target in (np.ones(GRID.N), T):
        f = bf(target)
        assert (f - B.projection(f)).norm() < 2e-5


@pytest.mark.parametrize("seed", range(3))
def test_model_space_invariants_matrix(seed):
    rng = np.random.default_rng(seed)
    b = random_bp(rng, 2, 2)
    bv = b.evaluate_many(T)
    bstar = np.conj(np.swapaxes(bv, 1, 2))
    Ba = model_space_basis(b, "analytic", GRID)
    Bc = model_space_basis(b, "coanalytic", GRID)
    assert Ba.dimension == Bc.dimension == 2
    for e in Ba.basis:
        assert project_minus(e).norm() < 1e-12
        assert project_plus(bf(np.einsum("kij,kj->ki", bstar, e.values))).norm() < 1e-9
    for e in Bc.basis:
        assert project_plus(e).norm() < 1e-12
        assert project_minus(bf(np.einsum("kij,kj->ki", bv, e.values))).norm() < 1e-9
    G = np.array([[e.inner(f) for f in Ba.basis] for e in Ba.basis])
    assert_allclose(G, np.eye(2), atol=1e-12)


def test_inverse_lam_x_gamma_and_inner():
    s = RationalMatrixFunction.inverse_lam()
    D = DBRSpace(s, GRID)
    assert D.kappa == 1
    assert_allclose(D.Xr, [[1.0]], atol=1e-12)
    assert_allclose(D.Xl, D.Xr.conj().T, atol=1e-12)
    g = D.gamma_r.apply(bf(T ** -1))
    assert_allclose(g.values[:, 0], np.ones(GRID.N), atol=1e-12)
    assert D.gamma_r.rank == 1
    v = bf(np.stack([1 / T, -np.ones(GRID.N)], 1), 1)
    assert dbr_inner(s, v, v, GRID) == pytest.approx(-1.0)
    ok, res = D.membership(v)
    assert ok and max(res) < 1e-12


def test_kappa_zero_examples():
    s = RationalMatrixFunction.constant([[0.5]])
    D = DBRSpace(s, GRID)
    assert D.Xr.shape == (0, 0)
    zero = bf(np.zeros((GRID.N, 2)), 1)
    f = bf(np.stack([T, np.conj(T)], 1), 1)
    assert dbr_inner(s, zero, f) == 0
    # Gamma terms vanish: direct quadrature of f^* Delta^{-1} f
    Dl = np.array([[1, -0.5], [-0.5, 1]])
    direct = np.mean([np.vdot(x, np.linalg.solve(Dl, x)) for x in f.values])
    assert dbr_inner(s, f, f) == pytest.approx(direct)
    # f_+ = conj(t) violates the first membership condition
    bad = bf(np.stack([np.conj(T), np.zeros(GRID.N)], 1), 1)
    assert not dbr_membership(s, bad).ok
    # the lower component must live on negative frequencies
    assert not dbr_membership(s, bf(np.tile([1.0, 2.0], (GRID.N, 1)), 1)).ok
    assert dbr_membership(s, bf(np.stack([np.ones(GRID.N), 2 * np.conj(T)], 1), 1)).ok


def test_x_operators_mismatch():
    from aipkit.hardy import ModelSpaceBasis
    b = BlaschkePotapovProduct(1, ((0.0, [[1]]),))
    Ba = model_space_basis(b, "analytic", GRID)
    with pytest.raises(KLConsistencyError):
        build_Xr(np.zeros((GRID.N, 1, 1)), Ba, ModelSpaceBasis("coanalytic", ()))
    Bc = model_space_basis(b, "coanalytic", GRID)
    X, _ = build_Xr(np.zeros((GRID.N, 1, 1)), Ba, Bc)
    with pytest.raises(KLConsistencyError):
        build_gamma_r(X, Ba, Bc, 1)


def _sections(s, mus, dim):
    fns, labels = [], []
    for mu in mus:
        for x in np.eye(dim):
            fns.append(lambda t, mu=mu, x=x: np.array([ds_kernel(s, mu, z) @ x for z in t]))
            labels.append((mu, x))
    return fns, labels


@pytest.mark.parametrize("kappa", [0, 1])
def test_kernel_section_gram_reproduces_kernel(kappa):
    rng = np.random.default_rng(11 + kappa)
    c = random_colligation(rng, 2, 1, kappa)
    s = characteristic_function(c)
    D = DBRSpace(s, CircleGrid(1024))
    fns, labels = _sections(s, [0.3 + 0.1j, -0.2 + 0.4j], 2)
    funcs = [D.boundary_function(f) for f in fns]
    G = D.gram(funcs)
    K = np.array([[li[1].conj() @ ds_kernel(s, lj[0], li[0]) @ lj[1] for lj in labels] for li in labels])
    assert_allclose(G, K, atol=1e-8)
    assert_allclose(G, G.conj().T, atol=1e-10)
    assert inertia(0.5 * (G + G.conj().T)).n_minus <= D.kappa
    for f in funcs:
        assert D.membership(f).ok


def test_adaptive_gram_converges():
    s = RationalMatrixFunction.constant([[0.3]])
    fns = [lambda t: np.stack([1 / (1 - 0.9 * t), np.zeros_like(t)], 1)]
    G, N, ok = adaptive_gram(s, fns, 1, N=64)
    assert ok
    assert N >= 128


@pytest.mark.parametrize("kappa", [0, 1])
def test_fourier_representation_is_isometric_and_reproducing(kappa):
    from aipkit.colligation import fourier_matrix
    rng = np.random.default_rng(21 + kappa)
    c = random_colligation(rng, 2, 1, kappa)
    s = characteristic_function(c)
    D = DBRSpace(s, CircleGrid(2048))
    cols = [D.boundary_function(lambda t, j=j: np.array([fourier_matrix(c, z)[:, j] for z in t]))
            for j in range(c.d)]
    G = D.gram(cols)
    assert_allclose(G, c.gram, atol=1e-5)
    # Hermitian symmetry of the indefinite inner product
    f, g = cols
    assert abs(D.inner(f, g) - np.conj(D.inner(g, f))) <= 1e-10
    # reproducing property: [F h, D_s(mu, .) x] = (F(mu) h, x)
    mu, x = 0.2 - 0.3j, np.array([1.0, -0.5j])
    sec = D.boundary_function(lambda t: np.array([ds_kernel(s, mu, z) @ x for z in t]))
    h = np.array([1.0, 2.0 - 1j])
    Fh = cols[0] * h[0] + cols[1] * h[1]
    assert abs(D.inner(Fh, sec) - np.vdot(x, fourier_matrix(c, mu) @ h)) <= 1e-5
