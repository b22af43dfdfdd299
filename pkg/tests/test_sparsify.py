import math

import numpy as np
import pytest
from _helpers import edge_map, terminal_resistances

from dynres import generators as gen
from dynres.graph import WeightedGraph, laplacian
from dynres.numerics import schur_block
from dynres.schur import TerminalGraph
from dynres.sparsify import SparsifyParams, approx_schur, leverage_scores, spectral_sparsify


def sandwich(LG, LH, rng, vectors=100, eig=10):
    """Extreme ratios of ``x' LH x / x' LG x`` over random and extreme directions."""
    n = LG.shape[0]
    xs = rng.standard_normal((vectors, n))
    ratios = [(x @ LH @ x) / (x @ LG @ x) for x in xs - xs.mean(axis=1, keepdims=True)]
    # generalized eigenvalues of the pencil on the range of LG
    w, V = np.linalg.eigh(LG)
    half = V[:, w > 1e-9 * w.max()] / np.sqrt(w[w > 1e-9 * w.max()])
    gen_vals = np.linalg.eigvalsh(half.T @ LH @ half)
    ratios += list(gen_vals[:eig]) + list(gen_vals[-eig:])
    return min(ratios), max(ratios)


def test_params_validation():
    with pytest.raises(ValueError):
        SparsifyParams(0.5)
    with pytest.raises(ValueError):
        SparsifyParams(0.1, gamma=1.0)
    with pytest.raises(ValueError):
        SparsifyParams(0.1, C=0)


def test_single_edge_kept_exactly():
    G = WeightedGraph(2, [(0, 1, 2.75)])
    for eps in (0.05, 0.2, 0.45):
        assert edge_map(spectral_sparsify(G, SparsifyParams(eps, C=0.01))) == {(0, 1): 2.75}


def test_tree_edges_all_kept():
    G = WeightedGraph(10, [(i, (i - 1) // 2, 1.0 + i) for i in range(1, 10)])
    assert np.allclose(leverage_scores(G), 1.0)
    H = spectral_sparsify(G, SparsifyParams(0.3, C=0.01, seed=3))
    assert edge_map(H) == edge_map(G)


def test_complete_graph_sandwich():
    # eps must stay below 1/2, so the loosest admissible value stands in for 0.5
    G = gen.complete(16)
    H = spectral_sparsify(G, SparsifyParams(0.45, gamma=0.1, seed=1))
    lo, hi = sandwich(laplacian(G), laplacian(H), np.random.default_rng(0))
    assert 0.5 <= lo and hi <= 1.5


@pytest.mark.parametrize("seed", range(4))
def test_complete_graph_sandwich_with_sampling(seed):
    G = gen.complete(100)
    eps = 0.45
    H = spectral_sparsify(G, SparsifyParams(eps, gamma=0.1, C=1.0, seed=seed))
    assert H.m < 0.6 * G.m
    lo, hi = sandwich(laplacian(G), laplacian(H), np.random.default_rng(seed))
    assert 1 - eps <= lo and hi <= 1 + eps


def test_default_constant_gives_tight_sandwich():
    G = gen.random_connected(60, extra=300, seed=4)
    p = SparsifyParams(0.25, gamma=0.1, seed=2)
    H = spectral_sparsify(G, p)
    lo, hi = sandwich(laplacian(G), laplacian(H), np.random.default_rng(1))
    assert 0.75 <= lo and hi <= 1.25


def test_expectation_preserved():
    G = gen.complete(10)
    total = np.zeros((10, 10))
    runs = 2000
    for s in range(runs):
        total += laplacian(spectral_sparsify(G, SparsifyParams(0.4, C=0.05, seed=s)))
    # per-entry standard error is about 0.04 off the diagonal and 0.12 on it
    assert np.allclose(total / runs, laplacian(G), atol=0.5)
    off = ~np.eye(10, dtype=bool)
    assert np.allclose((total / runs)[off], -1.0, atol=0.2)


def test_deterministic_under_seed():
    G = gen.random_connected(50, extra=200, seed=9)
    p = SparsifyParams(0.3, C=0.2, seed=77)
    assert spectral_sparsify(G, p).edge_multiset() == spectral_sparsify(G, p).edge_multiset()
    assert spectral_sparsify(G, p).edge_multiset() != spectral_sparsify(G, SparsifyParams(0.3, C=0.2, seed=78)).edge_multiset()


def test_edge_bound_is_a_hard_cap():
    for seed in range(10):
        G = gen.random_connected(80, extra=600, seed=seed)
        p = SparsifyParams(0.25, gamma=0.1, C=1.0, seed=seed)
        H = spectral_sparsify(G, p)
        assert H.m <= p.C * G.n * p.eps**-2 * math.log(G.n / p.gamma)


def test_piecewise_sparsification_unions():
    rng = np.random.default_rng(5)
    G = gen.random_connected(40, extra=300, seed=5)
    perm = rng.permutation(G.m)
    parts = [perm[: G.m // 2], perm[G.m // 2:]]
    H = WeightedGraph(G.vertices)
    for k, part in enumerate(parts):
        piece = WeightedGraph(G.vertices, [G.edges[i] for i in part])
        H.extend_trusted(spectral_sparsify(piece, SparsifyParams(0.25, seed=k)).edges)
    lo, hi = sandwich(laplacian(G), laplacian(H), rng)
    assert 0.75 <= lo and hi <= 1.25


def test_approx_schur_path():
    H = approx_schur(TerminalGraph(gen.path(3), [0, 2]), SparsifyParams(0.1))
    w = edge_map(H)
    assert list(w) == [(0, 2)]
    assert 0.45 <= w[(0, 2)] <= 0.55


def test_approx_schur_all_terminals():
    G = gen.random_connected(30, extra=100, seed=2)
    p = SparsifyParams(0.3, C=0.2, seed=4)
    assert approx_schur(TerminalGraph(G, G.vertices), p).edge_multiset() == spectral_sparsify(
        WeightedGraph(G.vertices, G.merged_edges()), p).edge_multiset()


def test_approx_schur_grid_side_resistances():
    G = gen.grid(8)
    K = list(range(8))
    eps = 0.25
    H = approx_schur(TerminalGraph(G, K), SparsifyParams(eps, gamma=0.1, C=0.5, seed=11))
    R = terminal_resistances(G, H, K)
    assert len(R) == 28
    ratio = R[:, 1] / R[:, 0]
    assert np.all(ratio >= 1 / (1 + eps)) and np.all(ratio <= 1 / (1 - eps))


def test_approx_schur_sandwiches_exact_schur():
    G = gen.random_connected(60, extra=150, seed=8)
    K = list(range(0, 60, 3))
    H = approx_schur(TerminalGraph(G, K), SparsifyParams(0.25, C=0.5, seed=1))
    lo, hi = sandwich(schur_block(laplacian(G), K), laplacian(H), np.random.default_rng(2))
    assert 0.75 <= lo and hi <= 1.25
