"""Dynamic approximate Schur complements cached on a separator tree.

Every tree node ``H`` keeps ``H.asc``, an approximate Schur complement of
the subgraph it represents onto its boundary.  Leaves sparsify their own
edges; internal nodes merge their children's complements, add the cross
edges ``X(H)`` and sparsify again.  Updates touch one root-to-leaf path
(plus the paths along which new boundary vertices are pushed down) and
recompute those nodes bottom-up.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NoSuchEdge, NonPositiveWeight, TooManyTerminals, UnknownVertex
from .graph import WeightedGraph
from .schur import TerminalGraph, merge_graphs
from .separator import SeparatorStrategy, build_separator_tree, validate
from .sparsify import SparsifyParams, approx_schur


class DynamicIndex:
    """Maintains a ``(1 +- delta)`` approximate Schur complement of ``G`` onto ``K``.

    ``delta_node = delta / (c_log log2 n + 1)`` is the accuracy used at every
    node, so errors compounded over the tree height stay within ``delta``.
    ``C`` is the sparsifier oversampling constant; small values force real
    sampling, the default keeps every edge at desk-scale sizes.
    """

    def __init__(self, G, delta=0.0625, K=(), strategy=None, seed=0, rebuild_coeff=1.0,
                 c_log=1.0, c_K=1.0, C=4.0, min_leaf_edges=32, debug=False):
        if not G.n:
            raise ValueError("graph has no vertices")
        self.n = G.n
        self.delta = float(delta)
        self.delta_node = self.delta / (c_log * math.log2(max(self.n, 2)) + 1)
        self.gamma = 1.0 / max(self.n, 2) ** 3
        self.C = C
        self.seed = seed
        self.strategy = strategy or SeparatorStrategy()
        self.rebuild_coeff = rebuild_coeff
        self.period = max(1, math.ceil(rebuild_coeff * math.sqrt(self.n)))
        # a query pair must always fit, even on tiny graphs
        self.terminal_budget = max(2.0, c_K * math.sqrt(self.n))
        self.min_leaf_edges = min_leaf_edges
        self.debug = debug
        self._vertices = list(G.vertices)
        self._coords = G.coords
        K = set(int(k) for k in K)
        for k in K:
            if k not in G:
                raise UnknownVertex(f"terminal {k} not in graph")
        if len(K) > self.terminal_budget:
            raise TooManyTerminals(f"{len(K)} terminals exceed budget {self.terminal_budget:.1f}")
        self.K = K
        self.counter = 0
        self.epoch = -1
        self.rebuilds = 0
        self.recomputations = 0
        self.last_stack = 0
        self._journal = None
        self._build(list(G.edges))

    # -- construction ------------------------------------------------------
    def _build(self, edge_list):
        G = WeightedGraph(self._vertices, edge_list, coords=self._coords)
        self.epoch += 1
        self.tree = build_separator_tree(G, self.strategy, terminals=self.K,
                                         min_leaf_edges=self.min_leaf_edges)
        self._next_id = len(self.tree.edges)
        self._pairs = {}
        for i, (u, v, _) in self.tree.edges.items():
            self._pairs.setdefault(_key(u, v), []).append(i)
        for node in sorted(self.tree.nodes, key=lambda x: -x.depth):
            node.recomputes = 0
            self._recompute(node)
        self._check()

    def rebuild(self):
        """Fresh separator tree and complements from the current edge multiset."""
        edges = [self.tree.edges[i] for i in sorted(self.tree.edges)]
        self.counter = 0
        self._build(edges)
        self.rebuilds += 1

    def params_for(self, node):
        return SparsifyParams(eps=self.delta_node, gamma=self.gamma, C=self.C,
                              seed=[int(self.seed), self.epoch, node.id, node.recomputes])

    def approx_schur_node(self, node):
        """Complement of ``node``'s subgraph onto its boundary, from its children's caches."""
        if node.is_leaf:
            H = WeightedGraph(node.vertices, node.edges.values())
        else:
            c1, c2 = node.children
            H = merge_graphs(c1.asc, c2.asc, extra_edges=list(node.X.values()))
            for b in node.boundary:
                H.add_vertex(b)
        return approx_schur(TerminalGraph(H, node.boundary), self.params_for(node), n_log=self.n)

    def _recompute(self, node):
        self._save(node)
        node.asc = self.approx_schur_node(node)
        node.recomputes += 1
        self.recomputations += 1

    def _update(self, dirty):
        """Recompute every dirty node once, children before parents."""
        for node in sorted(set(dirty), key=lambda x: (-x.depth, x.id)):
            self._recompute(node)

    # -- journal for query undo --------------------------------------------
    def _save(self, node):
        if self._journal is not None and node.id not in self._journal["nodes"]:
            self._journal["nodes"][node.id] = (set(node.boundary), node.asc, node.recomputes)

    def begin(self):
        self._journal = {"nodes": {}, "K": set(self.K), "counter": self.counter,
                         "recomputations": self.recomputations, "last_stack": self.last_stack}

    def rollback(self):
        j, self._journal = self._journal, None
        for nid, (boundary, asc, recomputes) in j["nodes"].items():
            node = self.tree.nodes[nid]
            node.boundary, node.asc, node.recomputes = boundary, asc, recomputes
        self.K = j["K"]
        self.counter = j["counter"]
        self.recomputations = j["recomputations"]
        self.last_stack = j["last_stack"]

    # -- public operations ---------------------------------------------------
    @property
    def root(self):
        return self.tree.root

    @property
    def root_asc(self):
        return self.tree.root.asc

    @property
    def height(self):
        return self.tree.height

    def graph(self):
        """The current graph, edges in insertion order."""
        return WeightedGraph(self._vertices, [self.tree.edges[i] for i in sorted(self.tree.edges)],
                             coords=self._coords)

    def _vertex(self, u):
        u = int(u)
        if u not in self.tree.root.vertices:
            raise UnknownVertex(f"vertex {u} not in graph")
        return u

    def insert(self, u, v, w):
        u, v, w = self._vertex(u), self._vertex(v), float(w)
        if not w > 0:
            raise NonPositiveWeight(f"edge ({u},{v}) has weight {w}")
        if u == v:
            raise ValueError("self-loops are not allowed")
        eid = self._next_id
        self._next_id += 1
        e = (u, v, w)
        self.tree.edges[eid] = e
        self._pairs.setdefault(_key(u, v), []).append(eid)
        Q = []
        dirty = []
        H = self.tree.root
        while True:
            Q.append(H)
            if H.is_leaf:
                H.edges[eid] = e
                self.tree.location[eid] = H
                break
            child = next((c for c in H.children if u in c.vertices and v in c.vertices), None)
            if child is None:
                H.X[eid] = e
                self.tree.location[eid] = H
                dirty += self._push_boundary(u, H)
                dirty += self._push_boundary(v, H)
                break
            H = child
        self.last_stack = len(Q)
        self._update(Q + dirty)
        self._tick()
        return eid

    def delete(self, u, v):
        u, v = int(u), int(v)
        ids = self._pairs.get(_key(u, v))
        if not ids:
            raise NoSuchEdge(f"no edge ({u},{v})")
        eid = ids.pop()
        if not ids:
            del self._pairs[_key(u, v)]
        owner = self.tree.location.pop(eid)
        del self.tree.edges[eid]
        if owner.is_leaf:
            del owner.edges[eid]
        else:
            del owner.X[eid]
        Q = self.tree.path_to(owner)
        self.last_stack = len(Q)
        self._update(Q)
        self._tick()

    def add_terminal(self, u, _transient=False):
        u = self._vertex(u)
        if u in self.K:
            return
        budget = self.terminal_budget + (2 if _transient else 0)
        if len(self.K) + 1 > budget:
            raise TooManyTerminals(f"terminal budget {self.terminal_budget:.1f} reached")
        self.K.add(u)
        self.add_boundary(u, self.tree.root, _count=not _transient)

    def add_boundary(self, u, H=None, _count=True):
        """Make ``u`` a boundary vertex from ``H`` down to the leaf holding it."""
        u = self._vertex(u)
        H = self.tree.root if H is None else H
        if u not in H.vertices:
            raise UnknownVertex(f"vertex {u} not in node {H.id}")
        dirty = self._push_boundary(u, H)
        if dirty:
            dirty = self.tree.path_to(H)[:-1] + dirty
        self.last_stack = len(dirty)
        self._update(dirty)
        if _count:
            self._tick()

    def _push_boundary(self, u, H):
        out = []
        N = H
        while N is not None:
            if u in N.boundary:
                break
            self._save(N)
            N.boundary.add(u)
            out.append(N)
            N = None if N.is_leaf else next(c for c in N.children if u in c.vertices)
        return out

    def _tick(self):
        self.counter += 1
        if self.counter >= self.period:
            self.rebuild()
        else:
            self._check()

    # -- inspection --------------------------------------------------------
    def _check(self):
        if self.debug:
            bad = self.check_invariants()
            if bad:
                raise AssertionError("; ".join(bad))

    def check_invariants(self):
        """Edge location, cache coverage and counter invariants (messages, empty when sound)."""
        out = [str(x) for x in validate(self.tree, strict=False, c_boundary=math.inf,
                                        c_height=math.inf, leaf_slack=math.inf) if x.prop == 8]
        for node in self.tree.nodes:
            for eid, (u, v, _) in node.X.items():
                if any(u in c.vertices and v in c.vertices for c in node.children):
                    out.append(f"cross edge {eid} at node {node.id} fits in a child")
            if node.asc is None or not node.boundary <= set(node.asc.vertices):
                out.append(f"node {node.id} cache misses boundary vertices")
        if not self.K <= self.tree.root.boundary:
            out.append("terminal missing from the root boundary")
        if len(self.K) > self.terminal_budget:
            out.append("terminal budget exceeded")
        if not self.counter < self.period:
            out.append("operation counter reached the rebuild period")
        count = sum(len(ids) for ids in self._pairs.values())
        if count != len(self.tree.edges):
            out.append("pair index out of sync")
        return out

    def state_bytes(self):
        """Canonical serialization of everything a query may touch.

        Complements are packed as raw float64 rows, so equality is bit-exact.
        """
        parts = [repr((sorted(self.K), self.counter, self.epoch, self.recomputations)).encode()]
        for node in self.tree.nodes:
            parts.append(repr((
                node.id, sorted(node.boundary), node.recomputes,
                sorted((i, e[0], e[1], e[2].hex()) for i, e in node.X.items()),
                sorted(node.edges),
            )).encode())
            asc = node.asc
            if asc is not None:
                parts.append(np.asarray(asc.vertices, dtype=np.int64).tobytes())
                parts.append(np.asarray(asc.edges, dtype=np.float64).tobytes())
        return b"\n".join(parts)


def _key(u, v):
    return (u, v) if u < v else (v, u)
