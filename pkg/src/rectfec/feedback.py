"""Minimum feedback repair sets through the coordinates graph.

Each erroneous cell ``(i, j)`` becomes an edge between row vertex ``R_i`` and
column vertex ``C_j``. A set of errors can be repaired by peeling exactly when
this graph is a forest, so a minimum-cost set of packets to request is the
complement of a maximum-weight spanning forest.

Vertex labels: rows are ``0..n`` and columns ``n+1..n+m+1``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ._kernels import dfs_tree_edges
from .codec import CodeParams
from .core import ErrorConfiguration


class CostFunction(enum.Enum):
    ALL_OR_NONE = "all-or-none"
    MODIFIED_ALL_OR_NONE = "modified-all-or-none"
    GRADED = "graded"


def packet_weight(cost: CostFunction, k: int, params: CodeParams, mask=None):
    """Repair cost of packet ``k``.

    Source packets cost ``1 + 1/(N+1)`` under the modified all-or-none cost so
    that parity packets are preferred; the value is an exact ``Fraction``.
    The graded cost is the number of corrupted bits in ``mask``.
    """
    if cost is CostFunction.ALL_OR_NONE:
        return 1
    if cost is CostFunction.MODIFIED_ALL_OR_NONE:
        return 1 + Fraction(1, params.N + 1) if k < params.K else 1
    if mask is None:
        raise ValueError("graded cost needs the corruption mask")
    bits = int(np.unpackbits(np.frombuffer(bytes(mask), dtype=np.uint8)).sum())
    if bits < 1:
        raise ValueError(f"erroneous packet {k} has an empty corruption mask")
    return bits


@dataclass(frozen=True)
class FeedbackRepairSet:
    packets: frozenset
    cost: Real = 0

    @property
    def indices(self) -> tuple:
        return tuple(sorted(self.packets))

    def __len__(self):
        return len(self.packets)

    def __bool__(self):
        return bool(self.packets)


EMPTY_FRS = FeedbackRepairSet(frozenset(), 0)


@dataclass(frozen=True, eq=False)
class CoordinatesGraph:
    """Bipartite row/column graph of an error configuration.

    Edge ``e`` joins row ``rows[e]`` and column ``cols[e]``, is labelled by
    packet index ``packets[e]`` and has weight ``weights[e]``. Edges are kept
    sorted by packet index.
    """

    n: int
    m: int
    rows: np.ndarray
    cols: np.ndarray
    packets: np.ndarray
    weights: tuple

    @property
    def n_vertices(self) -> int:
        return self.n + self.m + 2

    @property
    def n_edges(self) -> int:
        return len(self.packets)

    @property
    def rows_hit(self) -> int:
        return len(np.unique(self.rows))

    @property
    def cols_hit(self) -> int:
        return len(np.unique(self.cols))

    def _components(self):
        nv = self.n_vertices
        adj = coo_matrix(
            (np.ones(self.n_edges), (self.rows, self.n + 1 + self.cols)), shape=(nv, nv)
        )
        return connected_components(adj, directed=False)

    @property
    def n_components(self) -> int:
        """N_cc: connected components over all ``n+m+2`` vertices."""
        return int(self._components()[0])

    @property
    def n_nonsingleton_components(self) -> int:
        """N_nscc: components holding at least one edge."""
        if not self.n_edges:
            return 0
        labels = self._components()[1]
        return len(np.unique(labels[self.rows]))

    def is_forest(self) -> bool:
        touched = self.rows_hit + self.cols_hit
        return self.n_edges == touched - self.n_nonsingleton_components

    def restrict(self, keep) -> "CoordinatesGraph":
        keep = np.asarray(keep, dtype=bool)
        return CoordinatesGraph(
            self.n, self.m, self.rows[keep], self.cols[keep], self.packets[keep],
            tuple(w for w, k in zip(self.weights, keep) if k),
        )

    def without_packets(self, packets) -> "CoordinatesGraph":
        return self.restrict(~np.isin(self.packets, list(packets)))

    def edges(self):
        """Iterate ``(row, col, packet, weight)`` tuples."""
        return zip(self.rows.tolist(), self.cols.tolist(), self.packets.tolist(), self.weights)


def build_gadget(config: ErrorConfiguration, params: CodeParams,
                 cost: CostFunction = CostFunction.ALL_OR_NONE,
                 masks=None, weights=None) -> CoordinatesGraph:
    """One weighted edge per erroneous cell.

    ``masks`` (graded cost) maps a cell to its packed corruption mask, or is a
    ``(n+1, m+1, len)`` array. ``weights`` maps cells to explicit positive
    weights and overrides ``cost``.
    """
    if config.dims != (params.n, params.m):
        raise ValueError(f"configuration dims {config.dims} do not match code {(params.n, params.m)}")
    if cost is CostFunction.GRADED and masks is None and weights is None:
        raise ValueError("graded cost needs corruption masks")
    cells = sorted(config.errors)
    index = params.index_table()
    if cells:
        rc = np.array(cells, dtype=np.int64)
        packets = index[rc[:, 0], rc[:, 1]]
        order = np.argsort(packets, kind="stable")
        rc, packets = rc[order], packets[order]
        rows, cols = rc[:, 0].copy(), rc[:, 1].copy()
    else:
        rows = cols = packets = np.zeros(0, dtype=np.int64)
    if weights is not None:
        w = tuple(weights[(int(i), int(j))] for i, j in zip(rows, cols))
        if any(x <= 0 for x in w):
            raise ValueError("weights must be strictly positive")
    elif cost is CostFunction.GRADED:
        w = tuple(packet_weight(cost, int(k), params, masks[int(i), int(j)] if isinstance(masks, np.ndarray)
                                else masks[(int(i), int(j))])
                  for i, j, k in zip(rows, cols, packets))
    else:
        w = tuple(packet_weight(cost, int(k), params) for k in packets)
    return CoordinatesGraph(params.n, params.m, rows, cols, packets, w)


def gadget_from_arrays(n: int, m: int, rows, cols, packets) -> CoordinatesGraph:
    """Unit-weight gadget straight from edge arrays (hot path of the simulators)."""
    order = np.argsort(packets, kind="stable")
    packets = np.asarray(packets, dtype=np.int64)[order]
    return CoordinatesGraph(n, m, np.asarray(rows, dtype=np.int64)[order],
                            np.asarray(cols, dtype=np.int64)[order], packets, (1,) * len(packets))


def dfs_forest_mask(g: CoordinatesGraph) -> np.ndarray:
    """Boolean mask of the edges of the depth-first spanning forest.

    Vertices are rooted in ascending label order and each adjacency list is
    scanned in ascending packet index.
    """
    E = g.n_edges
    if E == 0:
        return np.zeros(0, dtype=bool)
    nv = g.n_vertices
    col_v = g.n + 1 + g.cols
    src = np.concatenate([g.rows, col_v])
    dst = np.concatenate([col_v, g.rows])
    eid = np.concatenate([np.arange(E), np.arange(E)])
    order = np.lexsort((g.packets[eid], src))
    indptr = np.zeros(nv + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=nv), out=indptr[1:])
    return dfs_tree_edges(nv, indptr, dst[order], eid[order], E)


def min_frs_unit(g: CoordinatesGraph) -> FeedbackRepairSet:
    """Minimum repair set under unit costs: the back edges of a DFS.

    Runs in time linear in the number of vertices and errors. The result has
    ``N_e - R - C + N_nscc`` packets.
    """
    if any(w != 1 for w in g.weights):
        raise ValueError("min_frs_unit needs unit weights; use min_frs_weighted")
    tree = dfs_forest_mask(g)
    back = g.packets[~tree]
    return FeedbackRepairSet(frozenset(back.tolist()), len(back))


class _DisjointSets:
    def __init__(self, size):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        if self.size[a] < self.size[b]:
            a, b = b, a
        self.parent[b] = a
        self.size[a] += self.size[b]
        return True


def min_frs_weighted(g: CoordinatesGraph) -> FeedbackRepairSet:
    """Minimum repair set for arbitrary positive weights (Kruskal).

    Edges are scanned by decreasing weight, ties broken by increasing packet
    index; an edge closing a cycle with heavier edges is requested.
    """
    if any(w <= 0 for w in g.weights):
        raise ValueError("weights must be strictly positive")
    order = sorted(range(g.n_edges), key=lambda e: (-g.weights[e], int(g.packets[e])))
    ds = _DisjointSets(g.n_vertices)
    rejected = []
    cost = 0
    for e in order:
        if not ds.union(int(g.rows[e]), g.n + 1 + int(g.cols[e])):
            rejected.append(int(g.packets[e]))
            cost += g.weights[e]
    return FeedbackRepairSet(frozenset(rejected), cost)


def min_frs(config: ErrorConfiguration, params: CodeParams,
            cost: CostFunction = CostFunction.ALL_OR_NONE, masks=None) -> FeedbackRepairSet:
    g = build_gadget(config, params, cost, masks)
    if cost is CostFunction.ALL_OR_NONE:
        return min_frs_unit(g)
    return min_frs_weighted(g)


def repair_cost_formula(n_e: int, R: int, C: int, n_nscc: int) -> int:
    """Size of a minimum repair set from the configuration's counts."""
    value = n_e - R - C + n_nscc
    if value < 0:
        raise ValueError(f"inconsistent counts {(n_e, R, C, n_nscc)}")
    return value
