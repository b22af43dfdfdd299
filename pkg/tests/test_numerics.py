from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynres import generators as gen
from dynres.errors import Singular, SingularBlock
from dynres.graph import WeightedGraph, laplacian
from dynres.numerics import (
    RationalMatrix,
    min_quadratic_extension,
    pinv,
    rational_solve,
    rational_solve_system,
    schur_block,
)


def test_pinv_identity():
    assert np.allclose(pinv(np.eye(4)), np.eye(4))


def test_pinv_unit_edge():
    L = np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert np.allclose(pinv(L), [[0.25, -0.25], [-0.25, 0.25]])


def test_pinv_zero():
    assert np.array_equal(pinv(np.zeros((3, 3))), np.zeros((3, 3)))


@given(st.integers(2, 30), st.integers(0, 10_000))
def test_pinv_reproduces_matrix(n, seed):
    L = laplacian(gen.random_connected(n, seed=seed))
    P = pinv(L)
    assert np.allclose(L @ P @ L, L, atol=1e-8 * np.abs(L).max())
    assert np.array_equal(P, P.T)


def test_schur_path():
    S = schur_block(laplacian(gen.path(3)), [0, 2])
    assert np.allclose(S, [[0.5, -0.5], [-0.5, 0.5]])


def test_schur_all_vertices_unchanged():
    L = laplacian(gen.random_connected(6, seed=1))
    assert np.allclose(schur_block(L, range(6)), L)


def test_schur_star_gives_triangle():
    S = schur_block(laplacian(gen.star(4)), [1, 2, 3])
    assert np.allclose(S, laplacian(WeightedGraph(3, [(0, 1, 1 / 3), (0, 2, 1 / 3), (1, 2, 1 / 3)])))


def test_schur_disconnected_block_is_singular():
    G = WeightedGraph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    with pytest.raises(SingularBlock):
        schur_block(laplacian(G), [0, 1])


@given(st.integers(4, 40), st.integers(0, 10_000))
def test_schur_is_laplacian_and_composes(n, seed):
    L = laplacian(gen.random_connected(n, seed=seed))
    rng = np.random.default_rng(seed)
    big = sorted(rng.choice(n, size=max(2, n // 2), replace=False).tolist())
    small = big[: max(1, len(big) // 2)]
    S1 = schur_block(L, big)
    assert np.abs(S1.sum(axis=1)).max() <= 1e-10 * np.abs(S1).max()
    off = S1[~np.eye(len(big), dtype=bool)]
    assert off.max() <= 1e-10 * np.abs(S1).max()
    two = schur_block(S1, [big.index(k) for k in small])
    one = schur_block(L, small)
    assert np.allclose(two, one, rtol=1e-8, atol=1e-10 * np.abs(L).max())


@given(st.integers(4, 40), st.integers(0, 10_000))
def test_schur_preserves_pseudo_inverse_forms(n, seed):
    L = laplacian(gen.random_connected(n, seed=seed))
    rng = np.random.default_rng(seed)
    K = sorted(rng.choice(n, size=max(2, n // 3), replace=False).tolist())
    S = schur_block(L, K)
    d = np.zeros(n)
    dK = rng.standard_normal(len(K))
    dK -= dK.mean()
    d[K] = dK
    full = d @ pinv(L) @ d
    reduced = dK @ pinv(S) @ dK
    assert reduced == pytest.approx(full, rel=1e-8)


def test_min_extension_zero():
    L = laplacian(gen.path(3))
    assert min_quadratic_extension(L, [0, 2], [0.0, 0.0]) == 0.0


def test_min_extension_path():
    L = laplacian(gen.path(3))
    assert min_quadratic_extension(L, [0, 2], [3.0, 1.0]) == pytest.approx(0.5 * 4)


@given(st.integers(3, 40), st.integers(0, 10_000))
def test_min_extension_matches_schur_form(n, seed):
    L = laplacian(gen.random_connected(n, seed=seed))
    rng = np.random.default_rng(seed)
    K = sorted(rng.choice(n, size=max(1, n // 2), replace=False).tolist())
    x = rng.standard_normal(len(K))
    q = x @ schur_block(L, K) @ x
    assert min_quadratic_extension(L, K, x) == pytest.approx(q, rel=1e-8, abs=1e-12)


def test_rational_diagonal():
    kappa = 3 * 9**6
    B = RationalMatrix([[kappa if i == j else 0 for j in range(3)] for i in range(3)])
    assert rational_solve(B, 1) == Fraction(1, kappa)


def test_rational_two_by_two():
    k = 1000
    assert rational_solve([[k, -1], [-1, k]], 0) == Fraction(k, k * k - 1)


@given(st.integers(1, 8), st.integers(0, 10_000))
def test_rational_solution_is_exact(n, seed):
    rng = np.random.default_rng(seed)
    rows = [[Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        rows[i][i] = sum(abs(x) for x in rows[i]) + 1
    B = RationalMatrix(rows)
    assert B.is_strictly_diagonally_dominant()
    rhs = [Fraction(int(rng.integers(-3, 4)), 7) for _ in range(n)]
    x = rational_solve_system(B, rhs)
    assert B.matvec(x) == rhs


def test_rational_singular():
    with pytest.raises(Singular):
        rational_solve([[1, 1], [1, 1]], 0)


def test_rational_matrix_helpers():
    A = RationalMatrix([[2, -1], [-1, 2]])
    assert A.is_symmetric()
    assert A.matmul(RationalMatrix([[1, 0], [0, 1]])) == A
    A[0, 1] = Fraction(1, 3)
    assert not A.is_symmetric()
