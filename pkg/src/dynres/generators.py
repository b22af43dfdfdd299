"""Graph families and random update streams used by tests, bench and CLI."""

from __future__ import annotations

import numpy as np
from scipy.spatial import Delaunay

from .graph import Delete, Insert, UnionFind, WeightedGraph


def grid(rows, cols=None, weight=1.0):
    cols = rows if cols is None else cols
    coords = {r * cols + c: (float(c), float(r)) for r in range(rows) for c in range(cols)}
    G = WeightedGraph(rows * cols, coords=coords)
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                G.add_edge(v, v + 1, weight)
            if r + 1 < rows:
                G.add_edge(v, v + cols, weight)
    return G


def path(n, weight=1.0):
    G = WeightedGraph(n, coords={v: (float(v), 0.0) for v in range(n)})
    for v in range(n - 1):
        G.add_edge(v, v + 1, weight)
    return G


def star(n):
    """Star on ``n`` vertices with center 0."""
    G = WeightedGraph(n)
    for v in range(1, n):
        G.add_edge(0, v, 1.0)
    return G


def complete(n, weight=1.0):
    G = WeightedGraph(n)
    for u in range(n):
        for v in range(u + 1, n):
            G.add_edge(u, v, weight)
    return G


def cycle(n, weight=1.0):
    G = WeightedGraph(n)
    for v in range(n):
        G.add_edge(v, (v + 1) % n, weight)
    return G


def planar_like(n, seed=0, weights=False):
    """Delaunay triangulation of ``n`` uniform random points (planar, connected)."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    tri = Delaunay(pts)
    seen = set()
    for simplex in tri.simplices:
        a, b, c = sorted(int(x) for x in simplex)
        seen.update({(a, b), (a, c), (b, c)})
    G = WeightedGraph(n, coords={v: (float(pts[v, 0]), float(pts[v, 1])) for v in range(n)})
    for u, v in sorted(seen):
        G.add_edge(u, v, float(rng.uniform(0.5, 2.0)) if weights else 1.0)
    return G


def random_connected(n, extra=None, seed=0, weights=(0.2, 5.0)):
    """Random spanning tree plus ``extra`` random edges, log-uniform weights."""
    rng = np.random.default_rng(seed)
    extra = n if extra is None else extra
    lo, hi = np.log(weights[0]), np.log(weights[1])
    G = WeightedGraph(n)
    order = rng.permutation(n)
    for k in range(1, n):
        u = int(order[k])
        v = int(order[rng.integers(0, k)])
        G.add_edge(u, v, float(np.exp(rng.uniform(lo, hi))))
    for _ in range(extra):
        u, v = (int(x) for x in rng.choice(n, size=2, replace=False))
        G.add_edge(u, v, float(np.exp(rng.uniform(lo, hi))))
    return G


def _local_pairs(G):
    """Candidate insert pairs: existing edges (parallel copies) and grid diagonals."""
    pairs = [(u, v) for u, v, _ in G.edges]
    if G.coords:
        pos = {G.coords[v]: v for v in G.vertices}
        for v in G.vertices:
            x, y = G.coords[v]
            w = pos.get((x + 1.0, y + 1.0))
            if w is not None:
                pairs.append((v, w))
    return pairs


def random_stream(G, length, seed=0, query_fraction=0.5, keep_connected=True, weights=(0.5, 2.0)):
    """Random interleaving of inserts, deletes and queries.

    Inserts stay local (parallel copies or cell diagonals) so separability is
    preserved.  With ``keep_connected`` deletes never cut the graph.
    Returns a list of tuples ``('I', u, v, w)``, ``('D', u, v)``, ``('Q', s, t)``.
    """
    rng = np.random.default_rng(seed)
    H = G.copy()
    candidates = _local_pairs(G)
    ops = []
    verts = H.vertices
    while len(ops) < length:
        r = rng.random()
        if r < query_fraction:
            s, t = (int(x) for x in rng.choice(verts, size=2, replace=False))
            ops.append(("Q", s, t))
            continue
        if r < query_fraction + (1 - query_fraction) / 2 or H.m == 0:
            u, v = candidates[int(rng.integers(len(candidates)))]
            w = float(rng.uniform(*weights))
            H.add_edge(u, v, w)
            ops.append(("I", u, v, w))
            continue
        for _ in range(20):
            u, v, w = H.edges[int(rng.integers(H.m))]
            trial = H.copy()
            trial.remove_edge(u, v)
            if not keep_connected or _is_connected(trial):
                H = trial
                ops.append(("D", u, v))
                break
    return ops


def _is_connected(G):
    uf = UnionFind(G.vertices)
    for u, v, _ in G.edges:
        uf.union(u, v)
    return len({uf.find(v) for v in G.vertices}) <= 1


def stream_updates(ops):
    """Convert stream tuples to :class:`Insert` / :class:`Delete` objects (queries skipped)."""
    out = []
    for op in ops:
        if op[0] == "I":
            out.append(Insert(op[1], op[2], op[3]))
        elif op[0] == "D":
            out.append(Delete(op[1], op[2]))
    return out
