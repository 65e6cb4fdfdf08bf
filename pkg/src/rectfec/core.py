"""Packet and grid primitives shared by the whole package.

Packets are fixed-length byte vectors. A grid of ``(n + 1) x (m + 1)`` packets
is stored as a single ``uint8`` array of shape ``(n + 1, m + 1, len)`` so that
row/column parities are plain ``np.bitwise_xor.reduce`` calls.
"""
from __future__ import annotations

import enum
import struct
import zlib
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable

import numpy as np

DEFAULT_LEN = 1024

BLOCK_MAGIC = b"RFEC"
BLOCK_VERSION = 1
_HEADER = struct.Struct("<4sHIIII")


class ResourceLimitError(RuntimeError):
    """An exhaustive computation was asked for an instance that is too large."""


class Status(enum.IntEnum):
    CORRECT = 0
    ERASED = 1
    CORRUPTED = 2


def crc32(payload: bytes) -> int:
    """IEEE CRC-32 (reflected 0xEDB88320, init and final xor 0xFFFFFFFF)."""
    return zlib.crc32(bytes(payload)) & 0xFFFFFFFF


@dataclass(frozen=True)
class Packet:
    """An authenticated payload.

    ``mask`` is the packed bit-flip pattern of a corrupted packet (``len``
    bytes, one bit per payload bit) and is only present with
    ``Status.CORRUPTED``.
    """

    payload: bytes
    status: Status = Status.CORRECT
    mask: bytes | None = None
    checksum: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "payload", bytes(self.payload))
        object.__setattr__(self, "checksum", crc32(self.payload))
        if self.status == Status.CORRUPTED:
            if self.mask is None or len(self.mask) != len(self.payload):
                raise ValueError("corrupted packet needs a mask of the payload length")
            if not any(self.mask):
                raise ValueError("corrupted packet mask has no set bit")
        elif self.mask is not None:
            raise ValueError("only corrupted packets carry a mask")

    def __len__(self):
        return len(self.payload)

    @classmethod
    def zeros(cls, length: int = DEFAULT_LEN) -> "Packet":
        return cls(bytes(length))

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.payload, dtype=np.uint8)


def xor_packets(a: Packet, b: Packet) -> Packet:
    """Bitwise xor of two payloads; the result is re-authenticated."""
    if len(a.payload) != len(b.payload):
        raise ValueError(f"payload length mismatch: {len(a.payload)} != {len(b.payload)}")
    out = np.bitwise_xor(a.to_array(), b.to_array())
    return Packet(out.tobytes())


def as_payload_array(packets, length: int | None = None) -> np.ndarray:
    """Stack packets (``Packet``, bytes, or a 2-D array) into a ``(k, len)`` uint8 array."""
    if isinstance(packets, np.ndarray):
        arr = np.ascontiguousarray(packets, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("payload array must be 2-D (count, len)")
    else:
        rows = [p.payload if isinstance(p, Packet) else bytes(p) for p in packets]
        lengths = {len(r) for r in rows}
        if len(lengths) > 1:
            raise ValueError(f"packets have different lengths: {sorted(lengths)}")
        width = lengths.pop() if lengths else (length or 0)
        arr = np.frombuffer(b"".join(rows), dtype=np.uint8).reshape(len(rows), width).copy()
    if length is not None and arr.shape[1] != length:
        raise ValueError(f"expected payload length {length}, got {arr.shape[1]}")
    return arr


@dataclass(frozen=True)
class GridCoord:
    row: int
    col: int

    def __iter__(self):
        return iter((self.row, self.col))


@dataclass(frozen=True)
class ErrorConfiguration:
    """A set of erroneous cells of an ``(n + 1) x (m + 1)`` grid."""

    dims: tuple[int, int]
    errors: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        n, m = self.dims
        if n < 1 or m < 1:
            raise ValueError(f"grid dimensions must be positive, got {self.dims}")
        errs = frozenset((int(i), int(j)) for i, j in self.errors)
        for i, j in errs:
            if not (0 <= i <= n and 0 <= j <= m):
                raise ValueError(f"coordinate {(i, j)} outside grid {self.dims}")
        object.__setattr__(self, "errors", errs)

    @classmethod
    def from_cells(cls, n: int, m: int, cells: Iterable) -> "ErrorConfiguration":
        return cls((n, m), frozenset(tuple(c) for c in cells))

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "ErrorConfiguration":
        rows, cols = np.nonzero(mask)
        return cls((mask.shape[0] - 1, mask.shape[1] - 1), frozenset(zip(rows.tolist(), cols.tolist())))

    def to_mask(self) -> np.ndarray:
        n, m = self.dims
        mask = np.zeros((n + 1, m + 1), dtype=bool)
        for i, j in self.errors:
            mask[i, j] = True
        return mask

    def __len__(self):
        return len(self.errors)

    def __iter__(self):
        return iter(sorted(self.errors))

    def __contains__(self, cell):
        return tuple(cell) in self.errors

    @property
    def n_errors(self) -> int:
        return len(self.errors)

    @property
    def rows_hit(self) -> int:
        """R: number of rows holding at least one error."""
        return len({i for i, _ in self.errors})

    @property
    def cols_hit(self) -> int:
        """C: number of columns holding at least one error."""
        return len({j for _, j in self.errors})

    def without(self, cells: Iterable) -> "ErrorConfiguration":
        return ErrorConfiguration(self.dims, self.errors - {tuple(c) for c in cells})


# -- block file format -------------------------------------------------------

def write_block(fh: BinaryIO, n: int, m: int, n_inputs: int, payloads: np.ndarray, statuses) -> None:
    """Write ``N = (n+1)(m+1)`` records ordered by packet index.

    ``payloads`` has shape ``(N, len)``; ``statuses`` holds one status per
    record. Corrupted packets are written as erased (the format only knows
    correct/erased).
    """
    payloads = np.ascontiguousarray(payloads, dtype=np.uint8)
    total = (n + 1) * (m + 1)
    if payloads.shape[0] != total or len(statuses) != total:
        raise ValueError(f"expected {total} records")
    length = payloads.shape[1]
    fh.write(_HEADER.pack(BLOCK_MAGIC, BLOCK_VERSION, n, m, length, n_inputs))
    for k in range(total):
        fh.write(bytes([0 if statuses[k] == Status.CORRECT else 1]))
        fh.write(payloads[k].tobytes())


def read_block(fh: BinaryIO):
    """Inverse of :func:`write_block`. Returns ``(n, m, n_inputs, payloads, statuses)``."""
    head = fh.read(_HEADER.size)
    if len(head) != _HEADER.size:
        raise ValueError("truncated block header")
    magic, version, n, m, length, n_inputs = _HEADER.unpack(head)
    if magic != BLOCK_MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != BLOCK_VERSION:
        raise ValueError(f"unsupported block version {version}")
    if n < 1 or m < 1 or n_inputs > n * m:
        raise ValueError("inconsistent block header")
    total = (n + 1) * (m + 1)
    payloads = np.zeros((total, length), dtype=np.uint8)
    statuses = np.zeros(total, dtype=np.int8)
    for k in range(total):
        rec = fh.read(1 + length)
        if len(rec) != 1 + length:
            raise ValueError(f"truncated record {k}")
        if rec[0] not in (0, 1):
            raise ValueError(f"bad status byte {rec[0]} in record {k}")
        statuses[k] = rec[0]
        payloads[k] = np.frombuffer(rec, dtype=np.uint8, offset=1)
    return n, m, n_inputs, payloads, statuses
