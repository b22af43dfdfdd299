"""Exact checks of the uMv -> s-t effective resistance reductions.

Two gadgets are built from a boolean matrix ``M`` and vectors ``u``, ``v``:

``separable``
    vertices ``a_ij``, ``b_ij`` (edge iff ``M_ij = 1``), row vertices ``u_i``
    joined to ``a_i*``, column vertices ``v_j`` joined to ``b_*j``.  ``uMv = 1``
    iff ``t`` lies on a 5-cycle.
``general``
    bipartite rows ``r_i`` / columns ``c_j`` (edge iff ``M_ij = 1``).
    ``uMv = 1`` iff ``t`` lies on a triangle.

``t`` is joined to the rows/columns selected by ``u`` and ``v`` and a hub
``s`` tops every other vertex up to weighted degree ``kappa``.  Grounding
``s`` then leaves ``B = kappa I - A`` with ``A`` the adjacency matrix of
``H = G - s``, and ``R(s, t) = (B^{-1})_tt``.  Everything here is exact.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

from . import numerics
from .errors import ReductionMismatch, WeightUnderflow
from .graph import Delete, Insert, WeightedGraph

MODES = ("separable", "general")


def _check_inputs(mode, M, u, v):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    M = tuple(tuple(int(bool(x)) for x in row) for row in M)
    n0 = len(M)
    if n0 < 1 or any(len(row) != n0 for row in M):
        raise ValueError("M must be a non-empty square boolean matrix")
    u = tuple(int(bool(x)) for x in u)
    v = tuple(int(bool(x)) for x in v)
    if len(u) != n0 or len(v) != n0:
        raise ValueError("u and v must have length n0")
    return M, u, v, n0


def umv(M, u, v):
    return int(any(u[i] and M[i][j] and v[j] for i in range(len(u)) for j in range(len(v))))


def gadget_size(mode, n0):
    """``n`` used for ``kappa``: ``n0^2 + 2 n0 + 2`` or ``2 n0 + 2``."""
    return n0 * n0 + 2 * n0 + 2 if mode == "separable" else 2 * n0 + 2


def gadget_kappa(mode, n0):
    n = gadget_size(mode, n0)
    return 3 * (n - 1) ** 6 if mode == "separable" else 3 * (n - 1) ** 5


@dataclass
class ReductionInstance:
    mode: str
    M: tuple
    u: tuple
    v: tuple
    n0: int
    kappa: int
    names: dict                 # vertex id -> role label
    base: list                  # edges of the matrix gadget (unit weight)
    t_edges: list               # (t, x) edges selected by u and v
    s_edges: list               # (s, x, weight) with exact rational weights
    Y: int
    counters: dict              # c(x) per row/column vertex
    s: int = field(init=False)
    t: int = field(init=False)

    def __post_init__(self):
        self.t = len(self.names) - 2
        self.s = len(self.names) - 1

    @property
    def n(self):
        return gadget_size(self.mode, self.n0)

    @property
    def num_vertices(self):
        return len(self.names)

    def edges(self):
        """All final-graph edges as ``(u, v, Fraction)``."""
        out = [(a, b, Fraction(1)) for a, b in self.base]
        out += [(self.t, x, Fraction(1)) for x in self.t_edges]
        out += [(self.s, x, w) for x, w in self.s_edges]
        return out

    def graph(self):
        return WeightedGraph(self.num_vertices, [(a, b, float(w)) for a, b, w in self.edges()])

    def H_adjacency(self):
        """0/1 adjacency lists of ``H = G - s`` (the gadget plus the t-edges)."""
        adj = {x: set() for x in range(self.num_vertices - 1)}
        for a, b in list(self.base) + [(self.t, x) for x in self.t_edges]:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def side_vertices(self):
        """The row/column vertices that ``t`` may attach to."""
        return [x for x in range(self.num_vertices - 2) if self.names[x][0] in "uvrc"]


def _layout(mode, M, n0):
    names = {}
    base = []
    if mode == "separable":
        a = {}
        b = {}
        for i in range(n0):
            for j in range(n0):
                a[i, j] = len(names)
                names[a[i, j]] = f"a{i + 1}{j + 1}"
        for i in range(n0):
            for j in range(n0):
                b[i, j] = len(names)
                names[b[i, j]] = f"b{i + 1}{j + 1}"
        rows = []
        cols = []
        for i in range(n0):
            rows.append(len(names))
            names[rows[-1]] = f"u{i + 1}"
        for j in range(n0):
            cols.append(len(names))
            names[cols[-1]] = f"v{j + 1}"
        for i in range(n0):
            for j in range(n0):
                if M[i][j]:
                    base.append((a[i, j], b[i, j]))
        for i in range(n0):
            for k in range(n0):
                base.append((rows[i], a[i, k]))
        for j in range(n0):
            for k in range(n0):
                base.append((cols[j], b[k, j]))
    else:
        rows = list(range(n0))
        cols = list(range(n0, 2 * n0))
        for i in rows:
            names[i] = f"r{i + 1}"
        for j in range(n0):
            names[cols[j]] = f"c{j + 1}"
        for i in range(n0):
            for j in range(n0):
                if M[i][j]:
                    base.append((rows[i], cols[j]))
    t = len(names)
    names[t] = "t"
    names[t + 1] = "s"
    return names, base, rows, cols


def build_gadget(mode, M, u, v):
    """Final graph of the reduction after ``u`` and ``v`` have been fed in."""
    M, u, v, n0 = _check_inputs(mode, M, u, v)
    kappa = gadget_kappa(mode, n0)
    names, base, rows, cols = _layout(mode, M, n0)
    deg = {x: 0 for x in names}
    for a, b in base:
        deg[a] += 1
        deg[b] += 1
    t = len(names) - 2
    counters = {x: 0 for x in rows + cols}
    t_edges = []
    Y = 0
    for i in range(n0):
        if u[i]:
            t_edges.append(rows[i])
            counters[rows[i]] += 1
            Y += 1
    for j in range(n0):
        if v[j]:
            t_edges.append(cols[j])
            counters[cols[j]] += 1
            Y += 1
    s_edges = [(t, Fraction(kappa - Y))]
    for x in sorted(names):
        if x >= t:
            continue
        w = Fraction(kappa - counters.get(x, 0) - deg[x])
        s_edges.append((x, w))
    for x, w in s_edges:
        if w <= 0:
            raise WeightUnderflow(f"s-edge to {names[x]} has weight {w}")
    return ReductionInstance(mode, M, u, v, n0, kappa, names, base, t_edges, s_edges, Y, counters)


# -- exact linear algebra -----------------------------------------------------

def laplacian_rational(num_vertices, edges):
    L = numerics.RationalMatrix.zeros(num_vertices)
    for a, b, w in edges:
        w = Fraction(w)
        L.rows[a][a] += w
        L.rows[b][b] += w
        L.rows[a][b] -= w
        L.rows[b][a] -= w
    return L


def exact_resistance(num_vertices, edges, s, t):
    """``R(s, t)`` over the rationals by grounding ``s`` and solving for ``t``."""
    L = laplacian_rational(num_vertices, edges)
    keep = [x for x in range(num_vertices) if x != s]
    sub = numerics.RationalMatrix([[L.rows[i][j] for j in keep] for i in keep])
    return numerics.rational_solve(sub, keep.index(t))


def adjacency_powers_tt(adj, t, k):
    """``(A^i)_tt`` for ``i = 0..k`` by counting closed walks with integer vectors."""
    verts = sorted(adj)
    pos = {x: i for i, x in enumerate(verts)}
    vec = [0] * len(verts)
    vec[pos[t]] = 1
    out = [1]
    for _ in range(k):
        nxt = [0] * len(verts)
        for x in verts:
            c = vec[pos[x]]
            if c:
                for y in adj[x]:
                    nxt[pos[y]] += c
        vec = nxt
        out.append(vec[pos[t]])
    return out


def bdiag(adj, t, kappa, terms=6):
    """``(B^{-1})_tt`` for ``B = kappa I - A``, plus the Neumann coefficients ``(A^i)_tt``."""
    verts = sorted(adj)
    pos = {x: i for i, x in enumerate(verts)}
    B = numerics.RationalMatrix.zeros(len(verts))
    for x in verts:
        B.rows[pos[x]][pos[x]] = Fraction(kappa)
        for y in adj[x]:
            B.rows[pos[x]][pos[y]] -= 1
    value = numerics.rational_solve(B, pos[t])
    return value, adjacency_powers_tt(adj, t, terms - 1)


def neumann_partial(kappa, coeffs):
    """``sum_i c_i / kappa^i``, the series of ``(kappa B^{-1})_tt = ((I - A/kappa)^{-1})_tt``."""
    return sum((Fraction(c, kappa**i) for i, c in enumerate(coeffs)), Fraction(0))


def threshold(mode, Y, kappa, n0, literal=False):
    """Decision threshold on ``lambda``.

    Every term of the series is non-negative, so a 5-cycle (separable) or a
    triangle (general) through ``t`` raises ``Lambda`` by at least
    ``2 / kappa^6`` (resp. ``2 / kappa^4``) above the cycle-free part, while
    the remaining tail stays below ``0.9`` of that unit.  The decision is
    ``lambda >= threshold``.  The separable fourth-order coefficient is
    ``(A^4)_tt = Y^2 + Y n0``.

    ``literal=True`` returns the threshold with the decision
    ``lambda <= threshold`` as originally stated (alternating series,
    ``(A^4)_tt = Y (n0 + 1)``); it misclassifies and is kept to show that.
    """
    k = Fraction(kappa)
    if mode == "separable":
        if literal:
            return 1 / k + Y / k**3 + Y * (n0 + 1) / k**5 - 1 / k**6
        return 1 / k + Y / k**3 + (Y * Y + Y * n0) / k**5 + 1 / k**6
    if literal:
        return 1 / k + Y / k**3 - 1 / k**4
    return 1 / k + Y / k**3 + 1 / k**4


def classify(mode, lam, Y, kappa, n0, literal=False):
    lam = Fraction(lam)
    T = threshold(mode, Y, kappa, n0, literal=literal)
    return int(lam <= T) if literal else int(lam >= T)


def approximation_slack(mode, kappa):
    """Multiplicative error the classifier must tolerate."""
    return Fraction(1, kappa**6) if mode == "separable" else Fraction(1, kappa**4)


def detect_structure(adj, t, mode):
    """Brute force: a 5-cycle through ``t`` (separable) or a triangle through ``t`` (general)."""
    length = 5 if mode == "separable" else 3

    def extend(path):
        x = path[-1]
        if len(path) == length:
            return t in adj[x]
        return any(extend(path + [y]) for y in sorted(adj[x]) if y not in path)

    return extend([t])


def balanced_separator(inst):
    """``{rows, columns, s, t}`` for the separable gadget."""
    return set(inst.side_vertices()) | {inst.s, inst.t}


# -- verification -------------------------------------------------------------

@dataclass
class Report:
    mode: str
    M: tuple
    u: tuple
    v: tuple
    umv: int
    detect: int
    classify: int
    Lambda: Fraction
    bdiag: Fraction
    coeffs: list
    tail: Fraction
    tail_bound: Fraction
    checks: dict

    @property
    def ok(self):
        return all(self.checks.values())

    def decimal(self, digits=40):
        return to_decimal(self.Lambda, digits)

    def bits(self):
        return self.Lambda.numerator.bit_length(), self.Lambda.denominator.bit_length()

    def counterexample(self):
        return {"mode": self.mode, "M": [list(r) for r in self.M], "u": list(self.u), "v": list(self.v),
                "failed": sorted(k for k, ok in self.checks.items() if not ok)}


def to_decimal(x, digits=40):
    with localcontext() as ctx:
        ctx.prec = digits
        return Decimal(x.numerator) / Decimal(x.denominator)


def check_instance(inst, edges=None):
    """Run every check on a (possibly tampered) instance; never raises on mismatch."""
    edges = inst.edges() if edges is None else edges
    lam = exact_resistance(inst.num_vertices, edges, inst.s, inst.t)
    adj = inst.H_adjacency()
    value, coeffs = bdiag(adj, inst.t, inst.kappa)
    order = 6 if inst.mode == "separable" else 4
    kappa = inst.kappa
    tail = abs(kappa * value - neumann_partial(kappa, coeffs[:order]))
    bound = Fraction(9, 10) / Fraction(kappa) ** (order - 1)
    truth = umv(inst.M, inst.u, inst.v)
    detect = int(detect_structure(adj, inst.t, inst.mode))
    cls = classify(inst.mode, lam, inst.Y, kappa, inst.n0)
    slack = approximation_slack(inst.mode, kappa)
    checks = {
        "trace": lam == value,
        "classify": cls == truth,
        "detect": detect == truth,
        "tail": tail <= bound,
        "slack": all(classify(inst.mode, lam * f, inst.Y, kappa, inst.n0) == truth
                     for f in (1 - slack, 1 + slack)),
    }
    return Report(inst.mode, inst.M, inst.u, inst.v, truth, detect, cls, lam, value, coeffs,
                  tail, bound, checks)


def verify_reduction(mode, M, u, v):
    """Build the gadget, check everything, raise :class:`ReductionMismatch` on any failure."""
    report = check_instance(build_gadget(mode, M, u, v))
    if not report.ok:
        raise ReductionMismatch(f"reduction check failed: {report.counterexample()}", report.counterexample())
    return report


def planted_fault(inst, delta=None):
    """Edges of ``inst`` with one s-edge weight shifted by ``1 / kappa^7``."""
    delta = Fraction(1, inst.kappa**7) if delta is None else Fraction(delta)
    edges = inst.edges()
    for k, (a, b, w) in enumerate(edges):
        if inst.s in (a, b) and inst.t not in (a, b):
            edges[k] = (a, b, w + delta)
            break
    return edges


def all_instances(n0):
    """Every ``(M, u, v)`` with ``M`` an ``n0 x n0`` boolean matrix."""
    for bits in itertools.product((0, 1), repeat=n0 * n0):
        M = tuple(tuple(bits[i * n0:(i + 1) * n0]) for i in range(n0))
        for u in itertools.product((0, 1), repeat=n0):
            for v in itertools.product((0, 1), repeat=n0):
                yield M, u, v


def random_instances(n0, count, seed=0):
    rng = random.Random(seed)
    for _ in range(count):
        M = tuple(tuple(rng.randint(0, 1) for _ in range(n0)) for _ in range(n0))
        u = tuple(rng.randint(0, 1) for _ in range(n0))
        v = tuple(rng.randint(0, 1) for _ in range(n0))
        yield M, u, v


# -- replay through the dynamic index ----------------------------------------------

def update_script(mode, M, u, v, decremental=False):
    """Initial edge list and the update sequence that produces the final gadget.

    Incremental: ``t`` starts isolated, the selected ``t``-edges are inserted,
    then the hub edges to ``t`` and to the row/column vertices.  Decremental:
    ``t`` starts attached to every row/column vertex and the graph is already
    ``kappa``-regular away from ``s``; unselected ``t``-edges are deleted and
    the matching hub edges raised (delete plus insert).
    """
    inst = build_gadget(mode, M, u, v)
    kappa = inst.kappa
    names, base, rows, cols = _layout(mode, inst.M, inst.n0)
    side = rows + cols
    deg = {x: 0 for x in names}
    for a, b in base:
        deg[a] += 1
        deg[b] += 1
    s, t = inst.s, inst.t
    initial = [(a, b, Fraction(1)) for a, b in base]
    if mode == "separable":
        initial += [(s, x, Fraction(kappa - deg[x])) for x in sorted(names) if x < t and x not in side]
    ops = []
    chosen = [rows[i] for i in range(inst.n0) if inst.u[i]] + [cols[j] for j in range(inst.n0) if inst.v[j]]
    if not decremental:
        for x in chosen:
            ops.append(Insert(t, x, Fraction(1)))
        ops.append(Insert(s, t, Fraction(kappa - inst.Y)))
        for x in side:
            ops.append(Insert(s, x, Fraction(kappa - inst.counters[x] - deg[x])))
        return inst, initial, ops
    initial += [(t, x, Fraction(1)) for x in side]
    initial += [(s, x, Fraction(kappa - 1 - deg[x])) for x in side]
    initial.append((s, t, Fraction(kappa - len(side))))
    for x in side:
        if x not in chosen:
            ops.append(Delete(t, x))
            ops.append(Delete(s, x))
            ops.append(Insert(s, x, Fraction(kappa - deg[x])))
    if inst.Y != len(side):
        ops.append(Delete(s, t))
        ops.append(Insert(s, t, Fraction(kappa - inst.Y)))
    return inst, initial, ops


def apply_script(initial, ops):
    """Exact edge multiset after replaying ``ops`` (LIFO deletes)."""
    edges = list(initial)
    for op in ops:
        if isinstance(op, Insert):
            edges.append((op.u, op.v, Fraction(op.w)))
        else:
            for k in range(len(edges) - 1, -1, -1):
                a, b, _ = edges[k]
                if {a, b} == {op.u, op.v}:
                    del edges[k]
                    break
            else:
                raise ValueError(f"script deletes a missing edge {op}")
    return sorted((min(a, b), max(a, b), w) for a, b, w in edges)


@dataclass
class ReplayReport:
    mode: str
    decremental: bool
    psi: float
    Lambda: Fraction
    eps: float

    @property
    def ratio(self):
        return self.psi / float(self.Lambda)

    @property
    def within(self):
        return (1 - self.eps) <= self.ratio <= (1 + self.eps)


def replay_as_updates(mode, M, u, v, eps=0.25, seed=0, decremental=False, strategy=None):
    """Drive a :class:`DynamicIndex` with the update script and query ``R(s, t)`` once.

    The index accuracy is far too coarse to separate the two cases (the gap
    is of order ``kappa^-6``); the report only compares the value.
    """
    from .effres import QueryParams, make_index, query

    inst, initial, ops = update_script(mode, M, u, v, decremental=decremental)
    G = WeightedGraph(inst.num_vertices, [(a, b, float(w)) for a, b, w in initial])
    params = QueryParams(eps=eps)
    index = make_index(G, params, seed=seed, strategy=strategy)
    for op in ops:
        if isinstance(op, Insert):
            index.insert(op.u, op.v, float(op.w))
        else:
            index.delete(op.u, op.v)
    psi = query(index, inst.s, inst.t, params)
    lam = exact_resistance(inst.num_vertices, inst.edges(), inst.s, inst.t)
    return ReplayReport(mode, decremental, psi, lam, eps)
