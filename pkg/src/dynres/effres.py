"""Effective-resistance queries on top of :class:`~dynres.index.DynamicIndex`."""

from __future__ import annotations

from dataclasses import dataclass

from . import numerics
from .errors import Disconnected, SameVertex, UnknownVertex
from .graph import laplacian, pair_demand
from .index import DynamicIndex


@dataclass(frozen=True)
class QueryParams:
    """Overall accuracy ``eps``; the index runs at ``delta = eps / 4``.

    The estimator is a direct solve, so ``delta_est`` only records the slack
    it is allowed, not an error it actually makes.
    """

    eps: float = 0.25
    delta_est: float | None = None

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.eps}")
        if self.delta_est is None:
            object.__setattr__(self, "delta_est", self.eps / 4)
        d, e = self.delta, self.delta_est
        if (1 + 2 * d) * (1 + e) > 1 + self.eps or (1 - 2 * d) * (1 - e) < 1 - self.eps:
            raise ValueError("(1 +- 2 delta)(1 +- delta_est) must stay within 1 +- eps")

    @property
    def delta(self):
        return self.eps / 4


def estimate_eff_res(H, s, t, delta_est=0.0):
    """``R_H(s, t)`` by a pseudo-inverse solve on the (small) graph ``H``."""
    for x in (s, t):
        if x not in H:
            raise UnknownVertex(f"vertex {x} not in graph")
    if s == t:
        raise SameVertex(f"s == t == {s}")
    if not H.connected(s, t):
        raise Disconnected(f"{s} and {t} lie in different components")
    comp = next(c for c in H.components() if s in c)
    sub = H if len(comp) == H.n else H.subgraph(comp)
    chi = pair_demand(sub, s, t)
    return float(chi @ numerics.pinv(laplacian(sub)) @ chi)


def make_index(G, params=None, **kwargs):
    """Index with ``delta = eps / 4`` for the given query accuracy."""
    params = params or QueryParams()
    return DynamicIndex(G, delta=params.delta, **kwargs)


def query(index, s, t, params=None):
    """Promote ``s`` and ``t`` to terminals, read ``R(s, t)`` off the root, undo."""
    params = params or QueryParams()
    s, t = int(s), int(t)
    for x in (s, t):
        if x not in index.root.vertices:
            raise UnknownVertex(f"vertex {x} not in graph")
    if s == t:
        raise SameVertex(f"s == t == {s}")
    index.begin()
    try:
        index.add_terminal(s, _transient=True)
        index.add_terminal(t, _transient=True)
        return estimate_eff_res(index.root_asc, s, t, params.delta_est)
    finally:
        index.rollback()


class SinglePairTracker:
    """Keeps ``R(s, t)`` current after every update so reads cost nothing."""

    def __init__(self, index, s, t, params=None):
        self.index = index
        self.s, self.t = int(s), int(t)
        self.params = params or QueryParams()
        self._refresh()

    def _refresh(self):
        try:
            self._value = query(self.index, self.s, self.t, self.params)
            self._error = None
        except Disconnected as exc:
            self._value, self._error = None, exc

    def insert(self, u, v, w):
        self.index.insert(u, v, w)
        self._refresh()

    def delete(self, u, v):
        self.index.delete(u, v)
        self._refresh()

    def query(self):
        if self._error is not None:
            raise self._error
        return self._value
