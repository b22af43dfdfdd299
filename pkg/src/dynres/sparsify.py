"""Spectral sparsification by leverage-score sampling, and ApproxSchur on top of it.

Edges whose scaled leverage reaches one, and bridges, are kept verbatim.  The remaining
edges are sampled with replacement, proportionally to leverage, with
``q = ceil(sum of scaled leverages)`` draws; every draw of edge ``e`` adds
``w(e) / (q p(e))``.  The expected Laplacian equals the input and the edge
count never exceeds ``C n eps^-2 ln(n / gamma)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .graph import WeightedGraph, laplacian
from .schur import TerminalGraph, exact_schur


@dataclass(frozen=True)
class SparsifyParams:
    eps: float
    gamma: float = 0.1
    C: float = 4.0
    seed: object = 0

    def __post_init__(self):
        if not 0 < self.eps < 0.5:
            raise ValueError(f"eps must lie in (0, 1/2), got {self.eps}")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.C > 0:
            raise ValueError("oversampling constant must be positive")

    def oversampling(self, n):
        return self.C * self.eps**-2 * math.log(max(n, 2) / self.gamma)

    def edge_bound(self, k, n):
        """Hard cap on output edges for ``k`` output vertices and log-term size ``n``."""
        return self.oversampling(n) * k


def leverage_scores(G, edges=None):
    """``w(e) R(e)`` for each edge, from one dense pseudo-inverse."""
    edges = G.merged_edges() if edges is None else edges
    if not edges:
        return np.zeros(0)
    idx = G.index()
    P = numerics.pinv(laplacian(G))
    i = np.array([idx[u] for u, _, _ in edges])
    j = np.array([idx[v] for _, v, _ in edges])
    w = np.array([x for _, _, x in edges])
    R = P[i, i] + P[j, j] - 2 * P[i, j]
    return np.clip(w * R, 0.0, None)


def spectral_sparsify(G, p, n_log=None):
    """Return a ``(1 +- eps)`` spectral sparsifier of ``G`` (w.h.p.) on the same vertices."""
    n_log = G.n if n_log is None else n_log
    edges = G.merged_edges()
    H = WeightedGraph(G.vertices, coords=G.coords)
    if not edges:
        return H
    rho = p.oversampling(n_log)
    lev = leverage_scores(G, edges)
    scaled = rho * lev
    # bridges (leverage one) are kept whatever the oversampling
    sure = (scaled >= 1.0) | (lev >= 1.0 - 1e-9)
    weights = np.zeros(len(edges))
    weights[sure] = [edges[k][2] for k in np.flatnonzero(sure)]
    rest = np.flatnonzero(~sure & (lev > 0))
    mass = float(scaled[rest].sum())
    if rest.size and mass > 0:
        q = math.ceil(mass)
        probs = lev[rest] / lev[rest].sum()
        rng = np.random.default_rng(p.seed)
        counts = rng.multinomial(q, probs)
        for pos, (k, c) in enumerate(zip(rest, counts)):
            if c:
                weights[k] = c * edges[k][2] / (q * probs[pos])
    kept = np.flatnonzero(weights > 0).tolist()
    H.extend_trusted([(edges[k][0], edges[k][1], float(weights[k])) for k in kept])
    if rho >= 1.0:
        bound = p.edge_bound(G.n, n_log)
        assert H.m <= bound, f"sparsifier kept {H.m} edges, bound {bound:.1f}"
    return H


def approx_schur(TG, p, n_log=None):
    """Exact Schur complement onto the terminals, then sparsified."""
    n_log = TG.graph.n if n_log is None else n_log
    S = exact_schur(TG)
    return spectral_sparsify(S, p, n_log=n_log)


def approx_schur_graph(G, K, p, n_log=None):
    return approx_schur(TerminalGraph(G, K), p, n_log=n_log)
