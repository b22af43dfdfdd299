"""Dynamic effective resistances on separable graphs.

A separator tree caches approximate Schur complements so that edge updates
and ``(1 +- eps)`` resistance queries touch only ``O(log n)`` small graphs.
The ``reduction`` module checks the matching lower-bound constructions in
exact arithmetic.
"""

from .effres import QueryParams, SinglePairTracker, estimate_eff_res, make_index, query
from .errors import *  # noqa: F401,F403
from .graph import (
    Delete,
    Insert,
    ResistanceOracle,
    WeightedGraph,
    effective_resistance_exact,
    electrical_flow_energy,
    laplacian,
    read_graph,
    write_graph,
)
from .index import DynamicIndex
from .schur import TerminalGraph, exact_schur, merge, schur_by_walks, walk_weight
from .separator import SeparatorStrategy, build_separator_tree, find_separator, validate
from .sparsify import SparsifyParams, approx_schur, spectral_sparsify

__version__ = "0.1.0"
