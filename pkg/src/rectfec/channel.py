"""Seeded memoryless channels that stamp packet statuses.

Randomness is counter-based: the generator for one transmission is a Philox
stream keyed by ``(seed, stream_id)``, and cells draw their values in
row-major order. Two transmissions with the same key see the same errors,
and distinct keys are independent, so trials can run in any order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .codec import CodeGrid
from .core import Status

StreamId = Union[int, tuple]


@dataclass(frozen=True)
class Erasure:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"erasure probability must be in [0, 1], got {self.p}")


@dataclass(frozen=True)
class BitFlip:
    pb: float

    def __post_init__(self):
        if not 0.0 <= self.pb <= 1.0:
            raise ValueError(f"bit error probability must be in [0, 1], got {self.pb}")


@dataclass(frozen=True)
class ChannelConfig:
    mode: Erasure | BitFlip
    seed: int = 0

    @classmethod
    def erasure(cls, p: float, seed: int = 0) -> "ChannelConfig":
        return cls(Erasure(p), seed)

    @classmethod
    def bitflip(cls, pb: float, seed: int = 0) -> "ChannelConfig":
        return cls(BitFlip(pb), seed)

    def packet_error_rate(self, packet_len: int) -> float:
        """Probability that a packet of ``packet_len`` bytes arrives damaged."""
        if isinstance(self.mode, Erasure):
            return self.mode.p
        return 1.0 - (1.0 - self.mode.pb) ** (8 * packet_len)

    def generator(self, stream_id: StreamId) -> np.random.Generator:
        return generator(self.seed, stream_id)

    def transmit(self, grid: CodeGrid, stream_id: StreamId = 0) -> CodeGrid:
        return transmit(grid, self, stream_id)

    def packet_losses(self, count: int, stream_id: StreamId = 0, packet_len: int = 1) -> np.ndarray:
        """Loss indicators for ``count`` bare packets (no grid)."""
        u = self.generator(stream_id).random(count)
        return u < self.packet_error_rate(packet_len)


def generator(seed: int, stream_id: StreamId) -> np.random.Generator:
    key = stream_id if isinstance(stream_id, tuple) else (stream_id,)
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def transmit(grid: CodeGrid, cfg: ChannelConfig, stream_id: StreamId = 0) -> CodeGrid:
    """Pass a grid through the channel; padding cells are not transmitted.

    Erased payloads are zeroed. Under bit flips the received payload carries
    the flips and ``masks`` records them.
    """
    out = grid.copy()
    rng = cfg.generator(stream_id)
    shape = grid.params.shape
    if isinstance(cfg.mode, Erasure):
        lost = (rng.random(shape) < cfg.mode.p) & grid.sent
        out.status[lost] = Status.ERASED
        out.payload[lost] = 0
        return out
    L = grid.packet_len
    bits = rng.random(shape + (8 * L,)) < cfg.mode.pb
    bits &= grid.sent[:, :, None]
    masks = np.packbits(bits, axis=-1)
    hit = masks.any(axis=-1)
    out.payload ^= masks
    out.status[hit] = Status.CORRUPTED
    out.masks = masks
    return out
