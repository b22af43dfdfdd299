"""Balanced vertex separators and the separator tree.

Three strategies are available:

``grid``
    median cut along the wider coordinate axis.  On grids this removes one
    full row or column; on other embedded graphs a vertex cover of the
    edges crossing the median line is added.
``bfs``
    the smallest BFS level (from a pseudo-peripheral vertex) that leaves
    both sides within the balance bound.
``spectral``
    Fiedler-vector sweep; the separator is the smaller endpoint side of
    the cut edges.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import NoBalancedSeparator
from .graph import WeightedGraph, laplacian

MIN_LEAF_EDGES = 32
_ALIASES = {"bfs-level": "bfs", "spectral-bisection": "spectral"}


@dataclass(frozen=True)
class SeparatorStrategy:
    name: str = "bfs"
    alpha: float = 2.0 / 3.0
    beta: float = 4.0
    fallback: bool = True

    def __post_init__(self):
        name = _ALIASES.get(self.name, self.name)
        if name not in ("grid", "bfs", "spectral"):
            raise ValueError(f"unknown separator strategy {self.name!r}")
        object.__setattr__(self, "name", name)
        if not 0.5 <= self.alpha < 1:
            raise ValueError("alpha must lie in [1/2, 1)")


# -- helpers ---------------------------------------------------------------

def _adjacency(G):
    adj = {v: set() for v in G.vertices}
    for u, v, _ in G.edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def _components(vertices, adj, removed=frozenset()):
    seen = set(removed)
    comps = []
    for s in sorted(vertices):
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    comp.append(y)
                    queue.append(y)
        comps.append(comp)
    return comps


def _bfs_levels(root, adj, allowed):
    dist = {root: 0}
    levels = [[root]]
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in sorted(adj[x]):
            if y in allowed and y not in dist:
                dist[y] = dist[x] + 1
                if dist[y] == len(levels):
                    levels.append([])
                levels[dist[y]].append(y)
                queue.append(y)
    return levels


def _pseudo_peripheral(comp, adj):
    allowed = set(comp)
    root = min(comp)
    for _ in range(3):
        levels = _bfs_levels(root, adj, allowed)
        far = min(levels[-1])
        if far == root:
            break
        root = far
    return root


def is_balanced(G, S, strategy, adj=None):
    """Every component of ``G - S`` has at most ``alpha n`` vertices."""
    adj = _adjacency(G) if adj is None else adj
    limit = strategy.alpha * G.n
    return all(len(c) <= limit for c in _components(G.vertices, adj, frozenset(S)))


def _budget(G, strategy):
    return strategy.beta * math.sqrt(G.n)


def _cover(cut, left, right):
    """Smaller endpoint side of a set of cut edges."""
    a = {u if u in left else v for u, v in cut}
    b = {v if v in right else u for u, v in cut}
    return a if len(a) <= len(b) else b


# -- strategies ------------------------------------------------------------

def _grid_separator(G, strategy, adj):
    if not G.coords or any(v not in G.coords for v in G.vertices):
        raise NoBalancedSeparator("grid strategy needs vertex coordinates")
    xs = sorted({G.coords[v][0] for v in G.vertices})
    ys = sorted({G.coords[v][1] for v in G.vertices})
    spans = (xs[-1] - xs[0], ys[-1] - ys[0])
    axis = 0 if (spans[0], len(xs)) >= (spans[1], len(ys)) else 1
    values = xs if axis == 0 else ys
    best = None
    mid = len(values) // 2
    # the exact median first, then its neighbours
    for off in (0, -1, 1, -2, 2):
        k = mid + off
        if not 0 <= k < len(values):
            continue
        m = values[k]
        col = {v for v in G.vertices if G.coords[v][axis] == m}
        left = {v for v in G.vertices if G.coords[v][axis] < m}
        right = {v for v in G.vertices if G.coords[v][axis] > m}
        cut = [(u, v) for u, v, _ in G.edges if (u in left and v in right) or (u in right and v in left)]
        S = col | _cover(cut, left, right)
        if left <= S or right <= S:
            continue
        if is_balanced(G, S, strategy, adj):
            if best is None or len(S) < len(best):
                best = S
            if off == 0:
                break
    if best is None:
        raise NoBalancedSeparator("no balanced median cut")
    return best


def _bfs_separator(G, strategy, comp, adj, outside):
    n = G.n
    limit = strategy.alpha * n
    root = _pseudo_peripheral(comp, adj)
    levels = _bfs_levels(root, adj, set(comp))
    sizes = [len(level) for level in levels]
    total = sum(sizes)
    before = 0
    candidates = []
    for i, size in enumerate(sizes):
        after = total - before - size
        if before and after and before <= limit and after + outside <= limit:
            candidates.append((size, abs(before - after), i))
        before += size
    if candidates:
        _, _, i = min(candidates)
        return set(levels[i])
    # fall back to checking actual components on the far side
    before = 0
    best = None
    for i, size in enumerate(sizes):
        if 0 < before <= limit and i < len(sizes) - 1:
            S = set(levels[i])
            if is_balanced(G, S, strategy, adj) and (best is None or len(S) < len(best)):
                best = S
        before += size
    if best is None:
        raise NoBalancedSeparator("no balanced BFS level")
    return best


def fiedler_vector(G):
    """Eigenvector of the second-smallest Laplacian eigenvalue (deterministic sign)."""
    n = G.n
    if n <= 400:
        _, vecs = np.linalg.eigh(laplacian(G))
        f = vecs[:, 1]
    else:
        idx = G.index()
        rows = [idx[u] for u, v, _ in G.edges] + [idx[v] for u, v, _ in G.edges]
        cols = [idx[v] for u, v, _ in G.edges] + [idx[u] for u, v, _ in G.edges]
        vals = [-w for _, _, w in G.edges] * 2
        A = scipy.sparse.csc_matrix((vals, (rows, cols)), shape=(n, n))
        deg = -np.asarray(A.sum(axis=1)).ravel()
        L = (A + scipy.sparse.diags(deg)).tocsc()
        v0 = np.cos(np.arange(n) + 1.0)
        _, vecs = scipy.sparse.linalg.eigsh(L, k=2, sigma=-1e-3, which="LM", v0=v0)
        f = vecs[:, 1]
    k = int(np.argmax(np.abs(f)))
    return f if f[k] > 0 else -f


def _spectral_separator(G, strategy, comp, adj, outside):
    sub = G if len(comp) == G.n else G.subgraph(comp)
    f = fiedler_vector(sub)
    order = [sub.vertices[i] for i in np.lexsort((np.array(sub.vertices), f))]
    m = len(order)
    lo = max(1, int(math.ceil((1 - strategy.alpha) * m)))
    hi = min(m - 1, int(math.floor(strategy.alpha * m)))
    if lo > hi:
        lo, hi = 1, m - 1
    ks = sorted(set(np.linspace(lo, hi, num=min(25, hi - lo + 1)).round().astype(int)))
    best = None
    for k in ks:
        left = set(order[:k])
        right = set(order[k:])
        cut = [(u, v) for u, v, _ in sub.edges if (u in left) != (v in left)]
        S = _cover(cut, left, right)
        if best is None or len(S) < len(best[0]):
            best = (S, k)
    S = best[0]
    if not is_balanced(G, S, strategy, adj):
        raise NoBalancedSeparator("spectral sweep cut is not balanced")
    return S


def find_separator(G, strategy=None):
    """A vertex set whose removal leaves components of at most ``alpha n`` vertices."""
    strategy = strategy or SeparatorStrategy()
    if G.n == 0:
        raise NoBalancedSeparator("empty graph")
    adj = _adjacency(G)
    comps = _components(G.vertices, adj)
    limit = strategy.alpha * G.n
    if all(len(c) <= limit for c in comps):
        return set()
    big = max(comps, key=len)
    budget = _budget(G, strategy)
    order = [strategy.name]
    if strategy.fallback:
        order += [x for x in ("spectral", "bfs") if x != strategy.name]
    best, reason = None, ""
    for name in order:
        try:
            S = _run(name, G, strategy, big, adj)
        except NoBalancedSeparator as exc:
            reason = str(exc)
            continue
        # a lone remaining component is small enough but splits nothing
        if len(_components(G.vertices, adj, frozenset(S))) < 2:
            reason = f"{name} separator leaves a single component"
            continue
        if best is None or len(S) < len(best):
            best = S
        if len(best) <= budget:
            return best
    if best is None:
        raise NoBalancedSeparator(reason)
    raise NoBalancedSeparator(f"separator of size {len(best)} exceeds budget {strategy.beta}*sqrt({G.n})")


def _run(name, G, strategy, big, adj):
    # other components are parts on their own, never joined with ``big``
    if name == "grid":
        return _grid_separator(G, strategy, adj)
    if name == "bfs":
        return _bfs_separator(G, strategy, big, adj, 0)
    return _spectral_separator(G, strategy, big, adj, 0)


def split_sides(G, S, adj=None):
    """Group the components of ``G - S`` into two vertex sides, largest first."""
    adj = _adjacency(G) if adj is None else adj
    comps = _components(G.vertices, adj, frozenset(S))
    # components carrying edges are placed first so both sides get edges
    comps.sort(key=lambda c: (len(c) == 1 and not adj[c[0]], -len(c), min(c)))
    sides = (set(), set())
    for c in comps:
        target = 0 if len(sides[0]) <= len(sides[1]) else 1
        sides[target].update(c)
    return sides


# -- the tree --------------------------------------------------------------

@dataclass(eq=False)
class TreeNode:
    id: int
    vertices: frozenset
    parent: "TreeNode | None" = None
    children: tuple = ()
    separator: set = field(default_factory=set)
    boundary: set = field(default_factory=set)
    X: dict = field(default_factory=dict)
    edges: dict = field(default_factory=dict)
    height: int = 0
    depth: int = 0
    asc: object = None
    recomputes: int = 0

    @property
    def is_leaf(self):
        return not self.children

    def __repr__(self):
        kind = "leaf" if self.is_leaf else "node"
        return f"<{kind} {self.id} |V|={len(self.vertices)} |d|={len(self.boundary)}>"


class SeparatorTree:
    """Binary separator tree.

    Leaves own the edges (``node.edges`` maps edge id to ``(u, v, w)``);
    internal nodes own only edges that were inserted across their
    separator (``node.X``).  ``location`` maps each edge id to its owner.
    """

    def __init__(self, graph, strategy, root, nodes, edges, location, leaf_edges, terminals):
        self.graph = graph
        self.strategy = strategy
        self.root = root
        self.nodes = nodes
        self.edges = edges
        self.location = location
        self.leaf_edges = leaf_edges
        self.terminals = set(terminals)

    @property
    def height(self):
        return self.root.height

    @property
    def n(self):
        return len(self.root.vertices)

    def leaves(self):
        return [x for x in self.nodes if x.is_leaf]

    def node_edge_ids(self, node):
        out = set()
        stack = [node]
        while stack:
            x = stack.pop()
            out.update(x.edges)
            out.update(x.X)
            stack.extend(x.children)
        return out

    def node_graph(self, node):
        ids = sorted(self.node_edge_ids(node))
        G = WeightedGraph(node.vertices, coords=_coords(self.graph, node.vertices))
        for i in ids:
            G.add_edge(*self.edges[i])
        return G

    def path_to(self, node):
        out = []
        while node is not None:
            out.append(node)
            node = node.parent
        return out[::-1]

    def max_boundary(self):
        return max(len(x.boundary) for x in self.nodes)


def _coords(G, vertices):
    if G.coords is None:
        return None
    return {v: G.coords[v] for v in vertices if v in G.coords}


def leaf_threshold(n, min_leaf_edges=MIN_LEAF_EDGES):
    return max(math.sqrt(n), min_leaf_edges)


def build_separator_tree(G, strategy=None, terminals=(), min_leaf_edges=MIN_LEAF_EDGES):
    """Recursively split ``G`` until every node holds at most ``max(sqrt n, n0)`` edges.

    ``terminals`` are forced into the root separator.  Edges with both
    endpoints in a separator go to the first child.
    """
    strategy = strategy or SeparatorStrategy()
    n = G.n
    threshold = leaf_threshold(n, min_leaf_edges)
    edges = {i: e for i, e in enumerate(G.edges)}
    location = {}
    nodes = []
    terminals = set(int(t) for t in terminals)

    def make(vertices, edge_ids, parent, depth):
        node = TreeNode(id=len(nodes), vertices=frozenset(vertices), parent=parent, depth=depth)
        nodes.append(node)
        is_root = parent is None
        if len(edge_ids) <= threshold:
            node.edges = {i: edges[i] for i in edge_ids}
            for i in edge_ids:
                location[i] = node
            if is_root:
                node.separator = set(terminals)
            return node
        sub = WeightedGraph(vertices, coords=_coords(G, vertices))
        sub.edges = [edges[i] for i in edge_ids]
        adj = _adjacency(sub)
        S = find_separator(sub, strategy)
        if is_root:
            S = S | terminals
        side1, side2 = split_sides(sub, S, adj)
        e1, e2 = [], []
        for i in edge_ids:
            u, v, _ = edges[i]
            if u in side2 or v in side2:
                e2.append(i)
            else:
                e1.append(i)
        if len(e1) == len(edge_ids) or len(e2) == len(edge_ids):
            raise NoBalancedSeparator(f"separator makes no progress on a node with {len(edge_ids)} edges")
        node.separator = set(S)
        c1 = make(side1 | S, e1, node, depth + 1)
        c2 = make(side2 | S, e2, node, depth + 1)
        node.children = (c1, c2)
        node.height = 1 + max(c1.height, c2.height)
        return node

    root = make(set(G.vertices), list(edges), None, 0)
    for node in nodes:
        if node.parent is None:
            node.boundary = set(node.separator)
        else:
            node.boundary = set(node.separator) | (node.parent.boundary & node.vertices)
    return SeparatorTree(G, strategy, root, nodes, edges, location, threshold, terminals)


# -- validation ------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    prop: int
    node: int
    detail: str

    def __str__(self):
        return f"property {self.prop} at node {self.node}: {self.detail}"


def validate(tree, strict=True, c_boundary=4.0, c_height=3.0, leaf_slack=0):
    """List every violated separator-tree property (empty list when sound).

    ``strict`` demands the boundary recursion with equality, as right after
    construction; otherwise boundaries may have grown (terminals, endpoints
    of cross edges) and only containment is required.  Property 8 covers
    edge-disjointness of siblings as well as the leaf/X edge partition.
    """
    out = []
    n = tree.n
    root = tree.root
    rootn = math.sqrt(n)
    # 1
    if set(root.vertices) != set(tree.graph.vertices):
        out.append(Violation(1, root.id, "root vertex set differs from the graph"))
    for node in tree.nodes:
        if node.is_leaf:
            if node.X:
                out.append(Violation(2, node.id, "leaf carries cross edges"))
            continue
        c1, c2 = node.children
        # 2
        if (c1.vertices | c2.vertices) != node.vertices:
            out.append(Violation(2, node.id, "children do not cover the node"))
        if (c1.vertices & c2.vertices) != frozenset(node.separator):
            out.append(Violation(2, node.id, "children overlap outside the separator"))
        # 4
        if not node.boundary <= (c1.boundary | c2.boundary):
            out.append(Violation(4, node.id, "children boundaries miss a parent boundary vertex"))
    # 3
    for node in tree.nodes:
        want = set(node.separator)
        if node.parent is not None:
            want |= node.parent.boundary & node.vertices
        elif strict:
            want |= tree.terminals
        ok = node.boundary == want if strict else want <= node.boundary
        if ok and not node.boundary <= node.vertices:
            ok = False
        if not ok:
            out.append(Violation(3, node.id, "boundary does not follow the recursion"))
    # 5
    for node in tree.nodes:
        if len(node.boundary) > c_boundary * rootn:
            out.append(Violation(5, node.id, f"|boundary|={len(node.boundary)} > {c_boundary}*sqrt(n)"))
    # 6
    cap = tree.leaf_edges + leaf_slack
    leaves = tree.leaves()
    for leaf in leaves:
        if len(leaf.edges) > cap:
            out.append(Violation(6, leaf.id, f"leaf holds {len(leaf.edges)} edges > {cap:.1f}"))
    max_leaves = 8 * max(1, math.ceil(len(tree.edges) / tree.leaf_edges))
    if len(leaves) > max_leaves:
        out.append(Violation(6, root.id, f"{len(leaves)} leaves > {max_leaves}"))
    # 7
    if root.height > c_height * max(1.0, math.log2(max(n, 2))):
        out.append(Violation(7, root.id, f"height {root.height} > {c_height}*log2(n)"))
    # 8
    seen = {}
    for node in tree.nodes:
        for i in list(node.edges) + list(node.X):
            seen.setdefault(i, []).append(node)
    for i, e in tree.edges.items():
        owners = seen.get(i, [])
        if len(owners) != 1:
            out.append(Violation(8, owners[0].id if owners else root.id, f"edge {i} {e[:2]} has {len(owners)} owners"))
            continue
        owner = owners[0]
        if tree.location.get(i) is not owner:
            out.append(Violation(8, owner.id, f"edge {i} location map is stale"))
        if owner.edges and i in owner.edges and not owner.is_leaf:
            out.append(Violation(8, owner.id, f"edge {i} stored on an internal node"))
        u, v, _ = e
        if u not in owner.vertices or v not in owner.vertices:
            out.append(Violation(8, owner.id, f"edge {i} endpoints outside its node"))
    for i in seen:
        if i not in tree.edges:
            out.append(Violation(8, seen[i][0].id, f"unknown edge id {i}"))
    return out
