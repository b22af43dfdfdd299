"""Weighted undirected multigraphs, Laplacians and the brute-force oracle.

Every approximate quantity elsewhere in the package is checked against
:func:`effective_resistance_exact`, which works on a dense pseudo-inverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.csgraph
import scipy.sparse.linalg

from . import numerics
from .errors import Disconnected, NonPositiveWeight, NoSuchEdge, ParseError, SameVertex, UnknownVertex

ORACLE_MAX_N = 2000


@dataclass(frozen=True)
class Insert:
    u: int
    v: int
    w: float


@dataclass(frozen=True)
class Delete:
    u: int
    v: int


class UnionFind:
    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra
        return ra


class WeightedGraph:
    """Undirected multigraph with positive conductances.

    ``vertices`` is any collection of integer ids; user-facing graphs use
    ``range(n)``, while subgraphs and Schur complements keep the ids of the
    graph they were cut from.  Edges are kept in insertion order and parallel
    copies are allowed.
    """

    def __init__(self, vertices, edges=(), coords=None):
        if isinstance(vertices, (int, np.integer)):
            vertices = range(int(vertices))
        self._vertices = sorted(set(int(v) for v in vertices))
        self._vset = set(self._vertices)
        self.edges = []
        self.degree = {v: 0.0 for v in self._vertices}
        self.coords = dict(coords) if coords else None
        for e in edges:
            self.add_edge(*e)

    # -- basic structure -------------------------------------------------
    @property
    def vertices(self):
        return self._vertices

    @property
    def n(self):
        return len(self._vertices)

    @property
    def m(self):
        return len(self.edges)

    def __contains__(self, v):
        return v in self._vset

    def index(self):
        return {v: i for i, v in enumerate(self._vertices)}

    def add_vertex(self, v):
        v = int(v)
        if v not in self._vset:
            self._vset.add(v)
            self._vertices.append(v)
            self._vertices.sort()
            self.degree[v] = 0.0

    def add_edge(self, u, v, w=1.0):
        u, v = int(u), int(v)
        w = float(w)
        if not w > 0:
            raise NonPositiveWeight(f"edge ({u},{v}) has weight {w}")
        for x in (u, v):
            if x not in self._vset:
                raise UnknownVertex(f"vertex {x} not in graph")
        if u == v:
            raise ValueError("self-loops are not allowed")
        self.edges.append((u, v, w))
        self.degree[u] += w
        self.degree[v] += w

    def extend_trusted(self, edges):
        """Append ``(u, v, w)`` triples already known to be valid (bulk path, no checks)."""
        deg = self.degree
        for u, v, w in edges:
            deg[u] += w
            deg[v] += w
        self.edges.extend(edges)

    def remove_edge(self, u, v):
        """Remove the most recently inserted copy of ``(u, v)`` and return it."""
        for i in range(len(self.edges) - 1, -1, -1):
            a, b, w = self.edges[i]
            if (a == u and b == v) or (a == v and b == u):
                del self.edges[i]
                self.degree[a] -= w
                self.degree[b] -= w
                return (a, b, w)
        raise NoSuchEdge(f"no edge ({u},{v})")

    def has_edge(self, u, v):
        return any((a == u and b == v) or (a == v and b == u) for a, b, _ in self.edges)

    def copy(self):
        g = WeightedGraph(self._vertices, coords=self.coords)
        g.edges = list(self.edges)
        g.degree = dict(self.degree)
        return g

    def check_degrees(self, tol=1e-9):
        recomputed = {v: 0.0 for v in self._vertices}
        for u, v, w in self.edges:
            recomputed[u] += w
            recomputed[v] += w
        return all(abs(recomputed[v] - self.degree[v]) <= tol * max(1.0, recomputed[v]) for v in self._vertices)

    def adjacency(self):
        adj = {v: [] for v in self._vertices}
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return adj

    def neighbors(self):
        adj = {v: set() for v in self._vertices}
        for u, v, _ in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def merged_edges(self):
        """Edges with parallel copies summed, as a sorted list of ``(u, v, w)`` with ``u < v``."""
        acc = {}
        for u, v, w in self.edges:
            key = (u, v) if u < v else (v, u)
            acc[key] = acc.get(key, 0.0) + w
        return [(u, v, acc[(u, v)]) for u, v in sorted(acc)]

    def edge_multiset(self):
        return sorted(((u, v, w) if u < v else (v, u, w)) for u, v, w in self.edges)

    def components(self):
        """Vertex lists of the connected components, ordered by smallest vertex."""
        if not self.edges:
            return [[v] for v in self._vertices]
        idx = self.index()
        i = [idx[u] for u, _, _ in self.edges]
        j = [idx[v] for _, v, _ in self.edges]
        A = scipy.sparse.coo_matrix((np.ones(len(i)), (i, j)), shape=(self.n, self.n))
        _, labels = scipy.sparse.csgraph.connected_components(A, directed=False)
        groups = {}
        for v, lab in zip(self._vertices, labels):
            groups.setdefault(lab, []).append(v)
        return sorted(groups.values(), key=lambda c: c[0])

    def connected(self, s, t):
        uf = UnionFind(self._vertices)
        for u, v, _ in self.edges:
            uf.union(u, v)
        return uf.find(s) == uf.find(t)

    def subgraph(self, vertices):
        keep = set(vertices)
        g = WeightedGraph(keep, coords=self._sub_coords(keep))
        for u, v, w in self.edges:
            if u in keep and v in keep:
                g.add_edge(u, v, w)
        return g

    def _sub_coords(self, keep):
        if self.coords is None:
            return None
        return {v: self.coords[v] for v in keep if v in self.coords}

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self._vertices == other._vertices and self.edges == other.edges

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.m})"


def laplacian(G):
    """Dense Laplacian ``D - A``; rows follow ``G.vertices``.  Parallel edges add."""
    n = G.n
    L = np.zeros((n, n))
    if not G.edges:
        return L
    idx = G.index()
    us, vs, ws = zip(*G.edges)
    i = np.fromiter((idx[u] for u in us), dtype=np.intp, count=len(us))
    j = np.fromiter((idx[v] for v in vs), dtype=np.intp, count=len(vs))
    w = np.fromiter(ws, dtype=float, count=len(ws))
    np.add.at(L, (i, j), -w)
    np.add.at(L, (j, i), -w)
    np.add.at(L, (i, i), w)
    np.add.at(L, (j, j), w)
    return L


def indicator(G, u):
    x = np.zeros(G.n)
    x[G.index()[u]] = 1.0
    return x


def pair_demand(G, s, t):
    """The demand vector ``1_s - 1_t``."""
    idx = G.index()
    x = np.zeros(G.n)
    x[idx[s]] += 1.0
    x[idx[t]] -= 1.0
    return x


def _check_pair(G, s, t):
    for x in (s, t):
        if x not in G:
            raise UnknownVertex(f"vertex {x} not in graph")
    if s == t:
        raise SameVertex(f"s == t == {s}")
    if not G.connected(s, t):
        raise Disconnected(f"{s} and {t} lie in different components")


def effective_resistance_exact(G, s, t):
    """``chi^T L^+ chi`` via a dense pseudo-inverse."""
    _check_pair(G, s, t)
    if G.n > ORACLE_MAX_N:
        raise ValueError(f"oracle capped at n <= {ORACLE_MAX_N}")
    chi = pair_demand(G, s, t)
    return float(chi @ numerics.pinv(laplacian(G)) @ chi)


def electrical_flow_energy(G, s, t):
    """Energy of the unit s-t electrical flow, sum of r(e) f(e)^2."""
    _check_pair(G, s, t)
    idx = G.index()
    phi = numerics.pinv(laplacian(G)) @ pair_demand(G, s, t)
    energy = 0.0
    for u, v, w in G.edges:
        flow = w * (phi[idx[u]] - phi[idx[v]])
        energy += flow * flow / w
    return float(energy)


class ResistanceOracle:
    """Exact resistances for one fixed graph by grounded sparse LU solves.

    Faster than the pseudo-inverse when many pairs of a large graph are
    queried; both are exact up to floating point.
    """

    def __init__(self, G):
        self.G = G
        self._idx = G.index()
        comps = G.components()
        self._label = {}
        for k, comp in enumerate(comps):
            for v in comp:
                self._label[v] = k
        # ground one vertex per component
        grounded = {self._idx[c[0]] for c in comps}
        self._free = np.array([i for i in range(G.n) if i not in grounded], dtype=int)
        self._pos = {int(i): k for k, i in enumerate(self._free)}
        self._lu = None
        if self._free.size:
            n = G.n
            if G.edges:
                us, vs, ws = zip(*G.edges)
                i = np.fromiter((self._idx[u] for u in us), dtype=np.intp, count=len(us))
                j = np.fromiter((self._idx[v] for v in vs), dtype=np.intp, count=len(vs))
                w = np.fromiter(ws, dtype=float, count=len(ws))
            else:
                i = j = np.zeros(0, dtype=np.intp)
                w = np.zeros(0)
            rows = np.concatenate([i, j, i, j])
            cols = np.concatenate([j, i, i, j])
            vals = np.concatenate([-w, -w, w, w])
            L = scipy.sparse.csc_matrix((vals, (rows, cols)), shape=(n, n))
            sub = L[self._free][:, self._free].tocsc()
            self._lu = scipy.sparse.linalg.splu(sub)

    def __call__(self, s, t):
        for x in (s, t):
            if x not in self._idx:
                raise UnknownVertex(f"vertex {x} not in graph")
        if s == t:
            raise SameVertex(f"s == t == {s}")
        if self._label[s] != self._label[t]:
            raise Disconnected(f"{s} and {t} lie in different components")
        b = np.zeros(self._free.size)
        i, j = self._idx[s], self._idx[t]
        if i in self._pos:
            b[self._pos[i]] += 1.0
        if j in self._pos:
            b[self._pos[j]] -= 1.0
        x = self._lu.solve(b)
        return float(b @ x)


def apply_update(G, op):
    """Return a new graph with ``op`` applied; ``G`` is left untouched."""
    H = G.copy()
    if isinstance(op, Insert):
        H.add_edge(op.u, op.v, op.w)
    elif isinstance(op, Delete):
        H.remove_edge(op.u, op.v)
    else:
        raise TypeError(f"unknown update {op!r}")
    return H


def read_graph(path):
    """Parse the ``n m`` / ``u v w`` text format."""
    lines = [ln for ln in Path(path).read_text().splitlines()]
    body = [(i + 1, ln.split()) for i, ln in enumerate(lines) if ln.strip() and not ln.lstrip().startswith("#")]
    if not body:
        raise ParseError("empty graph file", 1)
    lineno, head = body[0]
    try:
        n, m = int(head[0]), int(head[1])
    except (ValueError, IndexError) as exc:
        raise ParseError("expected header 'n m'", lineno) from exc
    if len(body) - 1 != m:
        raise ParseError(f"header declares {m} edges, found {len(body) - 1}", lineno)
    G = WeightedGraph(n)
    for lineno, parts in body[1:]:
        try:
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        except (ValueError, IndexError) as exc:
            raise ParseError("expected 'u v w'", lineno) from exc
        try:
            G.add_edge(u, v, w)
        except (NonPositiveWeight, UnknownVertex, ValueError) as exc:
            raise ParseError(str(exc), lineno) from exc
    return G


def write_graph(G, path):
    out = [f"{G.n} {G.m}"]
    out += [f"{u} {v} {w!r}" for u, v, w in G.edges]
    Path(path).write_text("\n".join(out) + "\n")
