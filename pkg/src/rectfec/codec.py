"""Two-dimensional rectangular (product) code over packets.

Layout of the ``N = (n+1)(m+1)`` code packets, by packet index ``k``:

* ``0 <= k < K``: source ``k`` at ``ordering(k)``
* ``K <= k < K+n``: parity of row ``k-K``, at ``(k-K, m)``
* ``K+n <= k < N-1``: parity of column ``k-K-n``, at ``(n, k-K-n)``
* ``k = N-1``: overall parity at ``(n, m)``

Every row and every column of a complete grid xors to zero, which is what the
peeling decoder exploits.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from ._kernels import peel_inplace
from .core import ErrorConfiguration, GridCoord, Packet, Status, as_payload_array


class Ordering(enum.Enum):
    ROW_MAJOR = "row-major"
    CRT = "crt"


class ConfigClass(enum.Enum):
    GOOD = "GC"
    BAD = "BC"
    MINIMAL_BAD = "MBC"

    @property
    def is_bad(self) -> bool:
        # every minimal bad configuration is also a bad one
        return self is not ConfigClass.GOOD


@dataclass(frozen=True)
class CodeParams:
    n: int
    m: int
    ordering: Ordering = Ordering.ROW_MAJOR

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError(f"dimensions must be positive, got n={self.n}, m={self.m}")
        if self.ordering is Ordering.CRT and math.gcd(self.n, self.m) != 1:
            raise ValueError(f"CRT ordering needs coprime dimensions, gcd({self.n}, {self.m}) != 1")

    @property
    def K(self) -> int:
        return self.n * self.m

    @property
    def N(self) -> int:
        return (self.n + 1) * (self.m + 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n + 1, self.m + 1)

    @property
    def rate(self) -> float:
        return (self.n / (self.n + 1)) * (self.m / (self.m + 1))

    def index_table(self) -> np.ndarray:
        """``(n+1, m+1)`` array giving the packet index stored at each cell."""
        return _tables(self)[0]

    def coord_table(self) -> np.ndarray:
        """``(N, 2)`` array giving the cell of each packet index."""
        return _tables(self)[1]

    def coord_of(self, k: int) -> GridCoord:
        if not 0 <= k < self.N:
            raise ValueError(f"packet index {k} outside [0, {self.N})")
        i, j = self.coord_table()[k]
        return GridCoord(int(i), int(j))

    def index_of(self, i: int, j: int) -> int:
        return int(self.index_table()[i, j])


def ordering(params: CodeParams, k: int) -> GridCoord:
    """Cell of source ``k`` inside the ``n x m`` source rectangle."""
    if not 0 <= k < params.K:
        raise ValueError(f"source index {k} outside [0, {params.K})")
    if params.ordering is Ordering.CRT:
        return GridCoord(k % params.n, k % params.m)
    return GridCoord(k // params.m, k % params.m)


@lru_cache(maxsize=256)
def _tables(params: CodeParams):
    n, m, K = params.n, params.m, params.K
    coords = np.empty((params.N, 2), dtype=np.int64)
    k = np.arange(K)
    if params.ordering is Ordering.CRT:
        coords[:K, 0], coords[:K, 1] = k % n, k % m
    else:
        coords[:K, 0], coords[:K, 1] = k // m, k % m
    coords[K:K + n, 0] = np.arange(n)
    coords[K:K + n, 1] = m
    coords[K + n:K + n + m, 0] = n
    coords[K + n:K + n + m, 1] = np.arange(m)
    coords[-1] = (n, m)
    index = np.empty(params.shape, dtype=np.int64)
    index[coords[:, 0], coords[:, 1]] = np.arange(params.N)
    coords.flags.writeable = False
    index.flags.writeable = False
    return index, coords


@dataclass
class CodeGrid:
    """Code packets in grid form, with per-cell reception status.

    ``sent`` is False for padding sources: they are known zeros that never go
    on the wire. ``masks`` holds packed bit-flip patterns for corrupted cells.
    """

    params: CodeParams
    payload: np.ndarray
    status: np.ndarray = None
    sent: np.ndarray = None
    masks: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        shape = self.params.shape
        if self.payload.shape[:2] != shape or self.payload.ndim != 3:
            raise ValueError(f"payload must have shape {shape} + (len,)")
        if self.status is None:
            self.status = np.zeros(shape, dtype=np.int8)
        if self.sent is None:
            self.sent = np.ones(shape, dtype=bool)

    @property
    def packet_len(self) -> int:
        return self.payload.shape[2]

    @property
    def pad_count(self) -> int:
        return int(np.count_nonzero(~self.sent))

    @property
    def n_inputs(self) -> int:
        """Number of real (non-padding) source packets."""
        return self.params.K - self.pad_count

    @property
    def sent_count(self) -> int:
        return int(np.count_nonzero(self.sent))

    def known_mask(self) -> np.ndarray:
        return (self.status == Status.CORRECT) | ~self.sent

    def error_configuration(self) -> ErrorConfiguration:
        return ErrorConfiguration.from_mask(~self.known_mask())

    def packet(self, k: int) -> Packet:
        i, j = self.params.coord_of(k)
        status = Status(int(self.status[i, j]))
        mask = self.masks[i, j].tobytes() if status == Status.CORRUPTED else None
        return Packet(self.payload[i, j].tobytes(), status, mask)

    def payloads_by_index(self) -> np.ndarray:
        """``(N, len)`` payloads in packet-index order."""
        c = self.params.coord_table()
        return self.payload[c[:, 0], c[:, 1]]

    def sources(self) -> np.ndarray:
        """The real source payloads, ``(n_inputs, len)``, in source order."""
        return self.payloads_by_index()[: self.n_inputs]

    def copy(self) -> "CodeGrid":
        return replace(
            self,
            payload=self.payload.copy(),
            status=self.status.copy(),
            sent=self.sent.copy(),
            masks=None if self.masks is None else self.masks.copy(),
        )

    def parity_ok(self) -> bool:
        """True when every row and every column xors to zero."""
        return not (np.bitwise_xor.reduce(self.payload, axis=0).any()
                    or np.bitwise_xor.reduce(self.payload, axis=1).any())


def encode(params: CodeParams, sources) -> CodeGrid:
    """Encode exactly ``K = n*m`` equal-length sources.

    Parities are computed with xor reductions: ``n(m-1)`` payload xors for the
    row parities, ``m(n-1)`` for the column parities and ``n-1`` for the
    overall parity, ``2K - m - 1`` in total.
    """
    src = as_payload_array(sources)
    if src.shape[0] != params.K:
        raise ValueError(f"expected {params.K} sources, got {src.shape[0]}")
    n, m = params.n, params.m
    coords = params.coord_table()
    grid = np.zeros((n + 1, m + 1, src.shape[1]), dtype=np.uint8)
    grid[coords[:params.K, 0], coords[:params.K, 1]] = src
    row_par = np.bitwise_xor.reduce(grid[:n, :m], axis=1)
    grid[:n, m] = row_par
    grid[n, :m] = np.bitwise_xor.reduce(grid[:n, :m], axis=0)
    grid[n, m] = np.bitwise_xor.reduce(row_par, axis=0)
    return CodeGrid(params, grid)


def choose_dimensions(K: int) -> tuple[CodeParams, int]:
    """Smallest square code holding ``K`` sources, and the padding it needs."""
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    n = math.isqrt(K - 1) + 1
    return CodeParams(n, n), n * n - K


def emission_size(k: int) -> int:
    """Packets on the wire when ``k`` packets are encoded with padding."""
    params, pad = choose_dimensions(k)
    return params.N - pad


def encode_block(packets, ordering: Ordering = Ordering.ROW_MAJOR) -> CodeGrid:
    """Pad ``packets`` up to a square code and encode them.

    Padding sources are zero payloads occupying the last source indices; they
    are marked as never sent.
    """
    src = as_payload_array(packets)
    params, pad = choose_dimensions(src.shape[0])
    if ordering is not Ordering.ROW_MAJOR:
        params = CodeParams(params.n, params.m, ordering)
    if pad:
        src = np.concatenate([src, np.zeros((pad, src.shape[1]), dtype=np.uint8)])
    grid = encode(params, src)
    coords = params.coord_table()[params.K - pad:params.K]
    grid.sent[coords[:, 0], coords[:, 1]] = False
    return grid


@dataclass
class DecodeResult:
    repaired: CodeGrid
    residual: ErrorConfiguration

    @property
    def success(self) -> bool:
        return not self.residual.errors


def decode_peel(grid: CodeGrid) -> DecodeResult:
    """Iteratively repair isolated errors until none is left or none is isolated.

    The input is not modified. Unknown payloads are ignored; repaired cells are
    marked correct in the returned grid and the remaining unknown cells form
    the residual (a stopping set, empty on success).
    """
    out = grid.copy()
    known = out.known_mask()
    out.payload[~known] = 0
    peel_inplace(out.payload, known)
    newly = known & (out.status != Status.CORRECT) & out.sent
    out.status[newly] = Status.CORRECT
    if out.masks is not None:
        out.masks[newly] = 0
    return DecodeResult(out, ErrorConfiguration.from_mask(~known))


def peel_mask(unknown: np.ndarray) -> np.ndarray:
    """Structural peeling on a boolean unknown-cell mask; returns the residual mask."""
    known = ~np.asarray(unknown, dtype=bool)
    empty = np.zeros(known.shape + (0,), dtype=np.uint8)
    peel_inplace(empty, known)
    return ~known


def peel_residual(config: ErrorConfiguration) -> ErrorConfiguration:
    """Residual of the peeling decoder on a coordinate-level configuration."""
    return ErrorConfiguration.from_mask(peel_mask(config.to_mask()))


def classify(config: ErrorConfiguration) -> ConfigClass:
    residual = peel_residual(config)
    if not residual.errors:
        return ConfigClass.GOOD
    if residual.errors == config.errors:
        return ConfigClass.MINIMAL_BAD
    return ConfigClass.BAD
