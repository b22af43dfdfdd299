import numpy as np
import pytest

from dynres import generators as gen
from dynres.effres import QueryParams, SinglePairTracker, estimate_eff_res, make_index, query
from dynres.errors import Disconnected, SameVertex, UnknownVertex
from dynres.graph import ResistanceOracle, WeightedGraph, effective_resistance_exact
from dynres.separator import SeparatorStrategy

GRID = SeparatorStrategy("grid")


def test_params():
    p = QueryParams(0.25)
    assert p.delta == 0.0625 and p.delta_est == 0.0625
    assert (1 + 2 * p.delta) * (1 + p.delta_est) <= 1.25
    with pytest.raises(ValueError):
        QueryParams(1.0)
    with pytest.raises(ValueError):
        QueryParams(0.25, delta_est=0.2)


def test_estimate_unit_edge():
    assert estimate_eff_res(WeightedGraph(2, [(0, 1, 1.0)]), 0, 1, 0.1) == pytest.approx(1.0)


def test_estimate_series():
    assert estimate_eff_res(gen.path(3), 0, 2) == pytest.approx(2.0)


def test_estimate_errors():
    G = WeightedGraph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    assert estimate_eff_res(G, 2, 3) == pytest.approx(1.0)
    with pytest.raises(Disconnected):
        estimate_eff_res(G, 0, 2)
    with pytest.raises(SameVertex):
        estimate_eff_res(G, 0, 0)
    with pytest.raises(UnknownVertex):
        estimate_eff_res(G, 0, 9)


def test_estimate_on_root_complement():
    idx = make_index(gen.grid(10), strategy=GRID)
    H = idx.root_asc
    a, b = sorted(idx.root.boundary)[:2]
    assert estimate_eff_res(H, a, b) == pytest.approx(effective_resistance_exact(H, a, b), rel=1e-8)


def test_query_on_existing_terminals():
    idx = make_index(gen.grid(10), strategy=GRID, K={0, 99})
    count = idx.recomputations
    R = query(idx, 0, 99)
    assert idx.recomputations == count
    assert R == pytest.approx(effective_resistance_exact(gen.grid(10), 0, 99), rel=0.25)


def test_query_adjacent_interior_pair():
    G = gen.grid(16)
    idx = make_index(G, QueryParams(0.25), strategy=GRID)
    s, t = 5 * 16 + 5, 5 * 16 + 6
    R = effective_resistance_exact(G, s, t)
    assert 0.75 * R <= query(idx, s, t) <= 1.25 * R


def test_query_with_real_sampling():
    # a coarse epsilon and a tiny oversampling constant make the sparsifier drop edges
    G = gen.grid(16)
    p = QueryParams(0.8)
    idx = make_index(G, p, strategy=GRID, C=1e-3, seed=5)
    assert idx.state_bytes() != make_index(G, p, strategy=GRID, C=1e-3, seed=6).state_bytes()
    oracle = ResistanceOracle(G)
    rng = np.random.default_rng(1)
    for _ in range(10):
        s, t = (int(x) for x in rng.choice(256, 2, replace=False))
        assert query(idx, s, t, p) == pytest.approx(oracle(s, t), rel=p.eps)


def test_query_repeats_identically_and_undoes():
    p = QueryParams(0.8)
    idx = make_index(gen.grid(12), p, strategy=GRID, C=1e-3, seed=2)
    before = idx.state_bytes()
    answers = [query(idx, 13, 130, p) for _ in range(3)]
    assert answers[0] == answers[1] == answers[2]
    assert idx.state_bytes() == before


def test_query_errors_leave_state_intact():
    idx = make_index(gen.grid(6), strategy=GRID)
    before = idx.state_bytes()
    with pytest.raises(SameVertex):
        query(idx, 3, 3)
    with pytest.raises(UnknownVertex):
        query(idx, 3, 300)
    assert idx.state_bytes() == before


def test_query_after_bridge_deletion():
    idx = make_index(gen.path(30), strategy=GRID)
    idx.delete(14, 15)
    with pytest.raises(Disconnected):
        query(idx, 0, 29)
    before = idx.state_bytes()
    assert query(idx, 0, 14) == pytest.approx(14, rel=0.25)
    assert idx.state_bytes() == before


def test_tracker_matches_fresh_query():
    G = gen.grid(10)
    a = make_index(G, strategy=GRID, seed=4)
    b = make_index(G, strategy=GRID, seed=4)
    tracker = SinglePairTracker(a, 0, 99)
    ops = [(0, 55, 1.0), (12, 87, 0.5), (3, 4, 2.0)]
    for u, v, w in ops:
        tracker.insert(u, v, w)
        b.insert(u, v, w)
        assert tracker.query() == query(b, 0, 99)
    tracker.delete(12, 87)
    b.delete(12, 87)
    assert tracker.query() == query(b, 0, 99)


def test_tracker_reports_disconnection():
    idx = make_index(gen.path(10), strategy=GRID, rebuild_coeff=10)
    tracker = SinglePairTracker(idx, 0, 9)
    tracker.delete(4, 5)
    with pytest.raises(Disconnected):
        tracker.query()
    tracker.insert(4, 5, 1.0)
    assert tracker.query() == pytest.approx(9, rel=0.25)
