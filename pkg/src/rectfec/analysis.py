"""Exact formulas, brute-force oracles and Monte Carlo estimators for one emission.

Conditioning is on the number of erroneous packets ``n_e``: configurations
are then uniform ``n_e``-subsets of the ``N = (n+1)(m+1)`` cells. Binomial
coefficients are exact integers and ratios are reduced as ``Fraction`` before
any conversion to float.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .channel import generator
from .codec import CodeParams, peel_mask
from .core import ErrorConfiguration, ResourceLimitError
from .feedback import (
    CostFunction,
    FeedbackRepairSet,
    gadget_from_arrays,
    min_frs_unit,
    packet_weight,
)

MAX_FOREST_EDGES = 20
MAX_BRUTE_FORCE_ERRORS = 18
MAX_BRUTE_FORCE_ERRORS_UNIT = 24
MAX_TABLE_CELLS = 20
MC_CHUNK = 4096


def _check_ne(N: int, n_e: int):
    if not 0 <= n_e <= N:
        raise ValueError(f"n_e must be in [0, {N}], got {n_e}")


def _check_dims(n: int, m: int):
    if n < 1 or m < 1:
        raise ValueError(f"dimensions must be positive, got n={n}, m={m}")


def _out(value: Fraction, exact: bool):
    return value if exact else float(value)


def law_ne(N: int, p, n_e: int, exact: bool = False):
    """``P(N_e = n_e)`` for ``N`` independent errors of probability ``p``."""
    if N < 0:
        raise ValueError(f"N must be nonnegative, got {N}")
    _check_ne(N, n_e)
    q = Fraction(p)
    if not 0 <= q <= 1:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return _out(math.comb(N, n_e) * q**n_e * (1 - q) ** (N - n_e), exact)


def _miss_prob(N: int, line_cells: int, n_e: int) -> Fraction:
    # probability that a given line of `line_cells` cells holds no error
    return Fraction(math.comb(N - line_cells, n_e), math.comb(N, n_e))


def exp_cols_given_ne(n: int, m: int, n_e: int, exact: bool = False):
    """``E(C | N_e = n_e)``: columns hit by ``n_e`` uniformly placed errors."""
    _check_dims(n, m)
    N = (n + 1) * (m + 1)
    _check_ne(N, n_e)
    return _out((m + 1) * (1 - _miss_prob(N, n + 1, n_e)), exact)


def exp_rows_given_ne(n: int, m: int, n_e: int, exact: bool = False):
    """``E(R | N_e = n_e)``."""
    _check_dims(n, m)
    N = (n + 1) * (m + 1)
    _check_ne(N, n_e)
    return _out((n + 1) * (1 - _miss_prob(N, m + 1, n_e)), exact)


def expected_I_regime3(n: int, m: int, n_e: int, exact: bool = False):
    """Expected repair cost when the errors form one giant component.

    With a single non-singleton component the cost is ``n_e + 1 - R - C``,
    so its mean is ``n_e + 1 - E(R) - E(C)``::

        n_e + 1 - (n+1) - (m+1)
            + [(m+1) C(N-n-1, n_e) + (n+1) C(N-m-1, n_e)] / C(N, n_e)

    Accurate up to ``o(1)`` when ``n_e`` is about ``(n+1) ln(n+m)``.
    """
    _check_dims(n, m)
    N = (n + 1) * (m + 1)
    _check_ne(N, n_e)
    num = (m + 1) * math.comb(N - n - 1, n_e) + (n + 1) * math.comb(N - m - 1, n_e)
    return _out(n_e + 1 - (n + 1) - (m + 1) + Fraction(num, math.comb(N, n_e)), exact)


def lambda_of_x(x: float) -> float:
    """``-(ln(1-x) + x) / 2``, the limiting expected repair cost at density ``x``."""
    if not 0.0 < x < 1.0:
        raise ValueError(f"x must be in (0, 1), got {x}")
    if x < 1e-3:
        # series sum_{k>=2} x^k / (2k) avoids cancellation
        return sum(x**k / (2 * k) for k in range(2, 12))
    return -(math.log1p(-x) + x) / 2


# -- forests of the complete bipartite graph --------------------------------

def _bipartite_edges(n: int, m: int):
    return [(i, n + 1 + j) for i in range(n + 1) for j in range(m + 1)]


def forest_counts(n: int, m: int) -> list[int]:
    """Number of forests of ``K_{n+1,m+1}`` with ``e`` edges, for every ``e``.

    Exhaustive backtracking over edges with an undoable union-find, so the
    cost grows with the number of forests.
    """
    _check_dims(n, m)
    edges = _bipartite_edges(n, m)
    if len(edges) > MAX_FOREST_EDGES:
        raise ResourceLimitError(f"{len(edges)} edges exceeds the enumeration limit {MAX_FOREST_EDGES}")
    parent = list(range(n + m + 2))
    counts = [0] * (len(edges) + 1)

    def root(x):
        while parent[x] != x:
            x = parent[x]
        return x

    def walk(e, size):
        if e == len(edges):
            counts[size] += 1
            return
        walk(e + 1, size)
        a, b = root(edges[e][0]), root(edges[e][1])
        if a != b:
            parent[b] = a
            walk(e + 1, size + 1)
            parent[b] = b

    walk(0, 0)
    return counts


def count_acyclic_subgraphs(n: int, m: int, n_e: int) -> int:
    """Forests with ``n_e`` edges in the complete bipartite row/column graph."""
    N = (n + 1) * (m + 1)
    _check_ne(N, n_e)
    return forest_counts(n, m)[n_e]


@lru_cache(maxsize=None)
def _forests_dp(a: int, b: int, e: int) -> int:
    if e < 0:
        return 0
    if a == 0:
        return int(e == 0)
    total = 0
    # component of the first row vertex: p rows, q columns, a spanning tree
    for p in range(1, a + 1):
        for q in range(0, b + 1):
            if q == 0:
                trees = 1 if p == 1 else 0
            else:
                trees = p ** (q - 1) * q ** (p - 1)
            if trees:
                total += (math.comb(a - 1, p - 1) * math.comb(b, q) * trees
                          * _forests_dp(a - p, b - q, e - (p + q - 1)))
    return total


def count_forests_recursive(n: int, m: int, n_e: int) -> int:
    """Same count as :func:`count_acyclic_subgraphs` by component decomposition.

    Uses the number of spanning trees of ``K_{p,q}``, ``p^(q-1) q^(p-1)``, and
    has no size limit.
    """
    _check_dims(n, m)
    _check_ne((n + 1) * (m + 1), n_e)
    return _forests_dp(n + 1, m + 1, n_e)


def prob_good_given_ne(n: int, m: int, n_e: int, exact: bool = False, method: str = "enumerate"):
    """``P(I = 0 | N_e = n_e)`` as forests over all ``n_e``-subsets."""
    N = (n + 1) * (m + 1)
    count = (count_acyclic_subgraphs if method == "enumerate" else count_forests_recursive)(n, m, n_e)
    return _out(Fraction(count, math.comb(N, n_e)), exact)


# -- brute force -------------------------------------------------------------

def _is_good(cells, shape) -> bool:
    unknown = np.zeros(shape, dtype=bool)
    for i, j in cells:
        unknown[i, j] = True
    return not peel_mask(unknown).any()


def brute_force_min_frs(config: ErrorConfiguration, params: CodeParams | None = None,
                        cost: CostFunction = CostFunction.ALL_OR_NONE,
                        masks=None, weights=None) -> FeedbackRepairSet:
    """Cheapest subset whose removal lets the peeling decoder finish.

    Tries every subset of the errors; does not use the coordinates graph.
    ``weights`` maps cells to explicit costs and overrides ``cost``.
    """
    cells = sorted(config.errors)
    unit = weights is None and cost is CostFunction.ALL_OR_NONE
    # unit costs stop at the first feasible size, so they tolerate more errors
    limit = MAX_BRUTE_FORCE_ERRORS_UNIT if unit else MAX_BRUTE_FORCE_ERRORS
    if len(cells) > limit:
        raise ResourceLimitError(f"{len(cells)} errors exceeds the brute-force limit {limit}")
    if params is None:
        params = CodeParams(*config.dims)
    shape = params.shape
    index = params.index_table()
    if weights is not None:
        w = [weights[c] for c in cells]
    else:
        w = [packet_weight(cost, int(index[c]), params,
                           None if masks is None else masks[c]) for c in cells]
    best, best_cost = None, None
    for size in range(len(cells) + 1):
        for removed in itertools.combinations(range(len(cells)), size):
            c = sum((w[r] for r in removed), 0)
            if best_cost is not None and c >= best_cost:
                continue
            gone = set(removed)
            if _is_good([cells[r] for r in range(len(cells)) if r not in gone], shape):
                best, best_cost = removed, c
        if unit and best is not None:
            break
    return FeedbackRepairSet(frozenset(int(index[cells[r]]) for r in best), best_cost)


def exhaustive_min_repair_costs(n: int, m: int) -> np.ndarray:
    """Minimum unit repair cost of every configuration of an ``(n+1) x (m+1)`` grid.

    Entry ``s`` is for the configuration whose cells are the set bits of
    ``s`` (bit ``i*(m+1)+j`` for cell ``(i, j)``). Goodness is decided by
    peeling each of the ``2^N`` sets; the largest good subset of every set
    comes from a max-over-subsets sweep.
    """
    _check_dims(n, m)
    N = (n + 1) * (m + 1)
    if N > MAX_TABLE_CELLS:
        raise ResourceLimitError(f"{N} cells exceeds the exhaustive limit {MAX_TABLE_CELLS}")
    masks = np.arange(1 << N, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(N)) & 1).astype(bool)
    size = bits.sum(axis=1)
    good = np.array([not peel_mask(b.reshape(n + 1, m + 1)).any() for b in bits])
    best = np.where(good, size, -1)
    for b in range(N):
        view = best.reshape(-1, 2, 1 << b)
        np.maximum(view[:, 1, :], view[:, 0, :], out=view[:, 1, :])
    return size - best


# -- Monte Carlo -------------------------------------------------------------

class Statistic(enum.Enum):
    EXPECTED_I = "expected-i"
    PROB_I_ZERO = "prob-i-zero"
    EXPECTED_C = "expected-c"
    EXPECTED_R = "expected-r"


@dataclass(frozen=True)
class ConditionalStats:
    n: int
    m: int
    n_e: int
    statistic: str
    estimate: float
    std_error: float
    trials: int

    def as_dict(self) -> dict:
        return {
            "n": self.n, "m": self.m, "n_e": self.n_e, "statistic": self.statistic,
            "estimate": self.estimate, "std_error": self.std_error, "trials": self.trials,
        }


def _chunk_sums(n, m, n_e, count, seed, chunk, statistic):
    rng = generator(seed, (chunk,))
    N = (n + 1) * (m + 1)
    index = CodeParams(n, m).index_table().ravel()
    s = s2 = 0
    for _ in range(count):
        cells = rng.choice(N, n_e, replace=False)
        rows, cols = np.divmod(cells, m + 1)
        if statistic is Statistic.EXPECTED_C:
            x = len(np.unique(cols))
        elif statistic is Statistic.EXPECTED_R:
            x = len(np.unique(rows))
        else:
            cost = len(min_frs_unit(gadget_from_arrays(n, m, rows, cols, index[cells])))
            x = cost if statistic is Statistic.EXPECTED_I else int(cost == 0)
        s += x
        s2 += x * x
    return s, s2


def mc_conditional(n: int, m: int, n_e: int, trials: int, seed: int = 0,
                   statistic: Statistic | str = Statistic.EXPECTED_I) -> ConditionalStats:
    """Estimate a statistic over uniform configurations of exactly ``n_e`` errors.

    Trials are split into fixed chunks of ``MC_CHUNK``; chunk ``c`` draws from
    stream ``(seed, c)`` and contributes integer partial sums, so the result
    does not depend on how chunks are scheduled.
    """
    statistic = Statistic(statistic)
    _check_dims(n, m)
    _check_ne((n + 1) * (m + 1), n_e)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    s = s2 = 0
    for c, start in enumerate(range(0, trials, MC_CHUNK)):
        a, b = _chunk_sums(n, m, n_e, min(MC_CHUNK, trials - start), seed, c, statistic)
        s += a
        s2 += b
    mean = Fraction(s, trials)
    var = (Fraction(s2) - mean * s) / (trials - 1) if trials > 1 else Fraction(0)
    return ConditionalStats(n, m, n_e, statistic.value, float(mean),
                            math.sqrt(max(float(var), 0.0) / trials), trials)
