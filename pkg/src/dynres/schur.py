"""Graph-level Schur complements, walk weights and the merge operator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import Budget, SingularBlock, NotAWalk, NotTerminalFree, SharedNonTerminal, UnknownVertex
from .graph import WeightedGraph, laplacian

WALK_BUDGET = 10**7
EDGE_DROP = 1e-12


@dataclass
class TerminalGraph:
    graph: WeightedGraph
    terminals: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.terminals = tuple(sorted(set(int(k) for k in self.terminals)))
        missing = [k for k in self.terminals if k not in self.graph]
        if missing:
            raise UnknownVertex(f"terminals {missing} not in graph")

    @property
    def nonterminals(self):
        K = set(self.terminals)
        return [v for v in self.graph.vertices if v not in K]


def matrix_to_graph(S, vertices, coords=None, drop=EDGE_DROP):
    """Read a Laplacian back into a graph; off-diagonals below ``drop * scale`` vanish."""
    S = np.asarray(S)
    G = WeightedGraph(vertices, coords=coords)
    k = len(vertices)
    if k < 2:
        return G
    scale = max(float(np.abs(np.diag(S)).max()), 1e-300)
    iu, ju = np.triu_indices(k, 1)
    w = -S[iu, ju]
    keep = w > drop * scale
    vs = G.vertices
    G.extend_trusted([(vs[i], vs[j], x) for i, j, x in zip(iu[keep].tolist(), ju[keep].tolist(), w[keep].tolist())])
    return G


def schur_onto(G, K):
    """Exact Schur complement of ``G`` onto ``K`` as a graph on ``K``.

    If the eliminated block is singular, components of ``G`` holding no
    terminal are dropped (they do not touch the terminals) and the solve is
    retried.  Parallel edges come back conductance-merged.
    """
    K = sorted(set(int(k) for k in K))
    Kset = set(K)
    coords = None
    if G.coords is not None:
        coords = {k: G.coords[k] for k in K if k in G.coords}
    if not K:
        return WeightedGraph([], coords=coords)
    if Kset == set(G.vertices):
        return WeightedGraph(K, G.merged_edges(), coords=coords)
    try:
        return _schur_graph(G, K, coords)
    except SingularBlock:
        pass
    live = set()
    for comp in G.components():
        if any(v in Kset for v in comp):
            live.update(comp)
    return _schur_graph(G.subgraph(live), K, coords)


def _schur_graph(H, K, coords):
    idx = H.index()
    S = numerics.schur_block(laplacian(H), [idx[k] for k in K])
    return matrix_to_graph(S, K, coords=coords)


def exact_schur(TG):
    """``S(G, K)`` for a :class:`TerminalGraph`, returned as a graph over ``K``."""
    return schur_onto(TG.graph, TG.terminals)


def _pair_weights(G):
    acc = {}
    for u, v, w in G.edges:
        acc[(u, v)] = acc.get((u, v), 0.0) + w
        acc[(v, u)] = acc.get((v, u), 0.0) + w
    return acc


def walk_weight(TG, walk):
    """Product of edge conductances over product of interior weighted degrees."""
    G = TG.graph
    K = set(TG.terminals)
    walk = [int(x) for x in walk]
    if len(walk) < 2:
        raise NotAWalk("a walk needs at least one edge")
    for x in walk:
        if x not in G:
            raise NotAWalk(f"vertex {x} not in graph")
    if walk[0] not in K or walk[-1] not in K:
        raise NotTerminalFree("walk must start and end at terminals")
    if any(x in K for x in walk[1:-1]):
        raise NotTerminalFree("walk interior touches a terminal")
    pw = _pair_weights(G)
    num = 1.0
    for a, b in zip(walk, walk[1:]):
        if (a, b) not in pw:
            raise NotAWalk(f"({a},{b}) is not an edge")
        num *= pw[(a, b)]
    den = 1.0
    for x in walk[1:-1]:
        den *= G.degree[x]
    return num / den


def schur_by_walks(TG, max_len):
    """Sum of terminal-free walk weights of length at most ``max_len``.

    Each undirected walk is counted once (from its smaller endpoint).  Only
    meant as a test oracle; the count grows exponentially.
    """
    G = TG.graph
    K = set(TG.terminals)
    pw = _pair_weights(G)
    adj = {v: [] for v in G.vertices}
    for (a, b), w in pw.items():
        adj[a].append((b, w))
    for v in adj:
        adj[v].sort()
    acc = {}
    count = 0
    for start in TG.terminals:
        stack = [(start, 1.0, 0)]
        while stack:
            x, weight, length = stack.pop()
            if length >= max_len:
                continue
            for y, w in adj[x]:
                count += 1
                if count > WALK_BUDGET:
                    raise Budget(f"more than {WALK_BUDGET} walk steps")
                if y in K:
                    if y > start:
                        acc[(start, y)] = acc.get((start, y), 0.0) + weight * w
                    continue
                stack.append((y, weight * w / G.degree[y], length + 1))
    out = WeightedGraph(TG.terminals)
    for (a, b) in sorted(acc):
        out.add_edge(a, b, acc[(a, b)])
    return out


def merge(G1, G2):
    """``G1 (+) G2``: union along shared terminals."""
    V1, V2 = set(G1.graph.vertices), set(G2.graph.vertices)
    shared = V1 & V2
    common = set(G1.terminals) & set(G2.terminals)
    bad = sorted(shared - common)
    if bad:
        raise SharedNonTerminal(f"shared vertices {bad} are not terminals in both graphs")
    coords = None
    if G1.graph.coords is not None or G2.graph.coords is not None:
        coords = dict(G1.graph.coords or {})
        coords.update(G2.graph.coords or {})
    G = WeightedGraph(V1 | V2, coords=coords)
    G.extend_trusted(list(G1.graph.edges) + list(G2.graph.edges))
    return TerminalGraph(G, set(G1.terminals) | set(G2.terminals))


def merge_graphs(*graphs, extra_edges=()):
    """Union of graphs on shared global ids plus ``extra_edges`` (no precondition check)."""
    verts = set()
    for g in graphs:
        verts.update(g.vertices)
    for u, v, _ in extra_edges:
        verts.update((u, v))
    G = WeightedGraph(verts)
    for g in graphs:
        G.extend_trusted(g.edges)
    G.extend_trusted(list(extra_edges))
    return G
