"""Emission/repair cycles over an erasure channel.

One *level* is one encoded block. After each emission the receiver peels what
it got and answers with a minimum feedback repair set (FRS). The sender keeps
only the requested packets. If encoding those packets gives a smaller
emission than the last one, they become the input of a new level. Otherwise
the last emission is repeated and the receiver merges both receptions.

Once the last level decodes, its sources are the FRS packets of the level
before it, which then decodes by peeling, and so on back to the first block.
Stream transmission chains levels the same way, each new block being the
previous FRS followed by fresh message packets.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import peel_inplace
from .channel import ChannelConfig, generator
from .codec import CodeGrid, CodeParams, emission_size, encode_block
from .core import DEFAULT_LEN, ErrorConfiguration, as_payload_array
from .feedback import (
    EMPTY_FRS,
    CostFunction,
    FeedbackRepairSet,
    build_gadget,
    gadget_from_arrays,
    min_frs_unit,
    min_frs_weighted,
)

DEFAULT_MAX_ITERS = 1000
_DATA_TAG = 0x7FFFFFFF


@dataclass(frozen=True)
class BlockPolicy:
    cost: CostFunction = CostFunction.ALL_OR_NONE
    max_iters: int = DEFAULT_MAX_ITERS
    payload_len: int = DEFAULT_LEN

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.payload_len < 1:
            raise ValueError("payload_len must be at least 1")


@dataclass(frozen=True)
class CycleOutcome:
    sent_count: int
    frs: FeedbackRepairSet
    decoded: bool
    reemitted: bool = False


@dataclass
class BlockTrace:
    K: int
    iterations: list = field(default_factory=list)
    terminated: bool = False
    receiver: "ReceiverState" = field(default=None, repr=False, compare=False)

    @property
    def total_sent(self) -> int:
        return sum(c.sent_count for c in self.iterations)

    @property
    def n_iterations(self) -> int:
        return len(self.iterations)


@dataclass
class StreamTrace:
    message_len: int
    K: int
    cycles: list = field(default_factory=list)
    tail: BlockTrace | None = None
    terminated: bool = False
    receiver: "ReceiverState" = field(default=None, repr=False, compare=False)

    @property
    def stages(self) -> int:
        """Full-block cycles plus the final single-block stage (possibly empty)."""
        return len(self.cycles) + (self.tail is not None)

    @property
    def n_iterations(self) -> int:
        return len(self.cycles) + (self.tail.n_iterations if self.tail else 0)

    @property
    def total_sent(self) -> int:
        return sum(c.sent_count for c in self.cycles) + (self.tail.total_sent if self.tail else 0)


def _sent_mask(params: CodeParams, pad: int) -> np.ndarray:
    sent = np.ones(params.shape, dtype=bool)
    if pad:
        c = params.coord_table()[params.K - pad:params.K]
        sent[c[:, 0], c[:, 1]] = False
    return sent


class SenderState:
    """What the sender remembers between cycles: the requested packets only."""

    def __init__(self):
        self.pending = None
        self.pending_index: tuple = ()
        self.last_emission: tuple[CodeParams, int] | None = None

    def emit(self, inputs: np.ndarray) -> CodeGrid:
        grid = encode_block(inputs)
        self.last_emission = (grid.params, grid.pad_count)
        return grid

    def regenerate(self) -> CodeGrid:
        """Rebuild the last emission from the retained FRS packets.

        Without the requested packets the emitted cells form a forest in the
        coordinates graph whenever a repeat is due, so peeling restores them.
        """
        params, pad = self.last_emission
        sent = _sent_mask(params, pad)
        payload = np.zeros(params.shape + (self.pending.shape[1],), dtype=np.uint8)
        known = ~sent
        c = params.coord_table()[list(self.pending_index)]
        payload[c[:, 0], c[:, 1]] = self.pending
        known[c[:, 0], c[:, 1]] = True
        peel_inplace(payload, known)
        if not known.all():
            raise RuntimeError("retained packets do not determine the last emission")
        return CodeGrid(params, payload, sent=sent)

    def serve(self, grid: CodeGrid, frs: FeedbackRepairSet) -> None:
        idx = frs.indices
        c = grid.params.coord_table()[list(idx)]
        self.pending = grid.payload[c[:, 0], c[:, 1]].copy()
        self.pending_index = idx


@dataclass
class Level:
    params: CodeParams
    n_inputs: int
    n_carried: int
    payload: np.ndarray
    known: np.ndarray
    frs: tuple = ()

    @property
    def complete(self) -> bool:
        return bool(self.known.all())


class ReceiverState:
    """Per-level correct cells and the chain of FRS requests.

    Only correct (received or peeled) payloads are stored; unknown cells stay
    zero.
    """

    def __init__(self, cost: CostFunction = CostFunction.ALL_OR_NONE):
        self.cost = cost
        self.levels: list[Level] = []
        self.delivered = None

    @property
    def frs_chain(self) -> list:
        return [lvl.frs for lvl in self.levels]

    def receive(self, rx: CodeGrid, n_carried: int = 0, new_level: bool = True) -> FeedbackRepairSet:
        got = rx.known_mask()
        if new_level:
            payload = rx.payload.copy()
            payload[~got] = 0
            lvl = Level(rx.params, rx.n_inputs, n_carried, payload, got.copy())
            self.levels.append(lvl)
        else:
            lvl = self.levels[-1]
            fresh = got & ~lvl.known
            lvl.payload[fresh] = rx.payload[fresh]
            lvl.known |= got
        peel_inplace(lvl.payload, lvl.known)
        frs = self._repair_set(lvl, rx)
        lvl.frs = frs.indices
        return frs

    def _repair_set(self, lvl: Level, rx: CodeGrid) -> FeedbackRepairSet:
        if lvl.known.all():
            return EMPTY_FRS
        params = lvl.params
        rows, cols = np.nonzero(~lvl.known)
        if self.cost is CostFunction.ALL_OR_NONE:
            packets = params.index_table()[rows, cols]
            return min_frs_unit(gadget_from_arrays(params.n, params.m, rows, cols, packets))
        config = ErrorConfiguration.from_mask(~lvl.known)
        masks = None
        if self.cost is CostFunction.GRADED:
            if rx.masks is None:
                raise ValueError("graded cost needs a bit-flip channel")
            masks = rx.masks
        return min_frs_weighted(build_gadget(config, params, self.cost, masks))


def run_cycle(sender: SenderState, receiver: ReceiverState, channel: ChannelConfig,
              inputs, stream_id=0, n_carried: int = 0) -> CycleOutcome:
    """Encode ``inputs`` as a new level, transmit, and get the receiver's request."""
    grid = sender.emit(as_payload_array(inputs))
    rx = channel.transmit(grid, stream_id)
    frs = receiver.receive(rx, n_carried, new_level=True)
    sender.serve(grid, frs)
    return CycleOutcome(grid.sent_count, frs, not frs)


def run_reemission(sender: SenderState, receiver: ReceiverState, channel: ChannelConfig,
                   stream_id=0) -> CycleOutcome:
    """Repeat the last emission; the receiver merges it into the current level."""
    grid = sender.regenerate()
    rx = channel.transmit(grid, stream_id)
    frs = receiver.receive(rx, new_level=False)
    sender.serve(grid, frs)
    return CycleOutcome(grid.sent_count, frs, not frs, reemitted=True)


def _base_key(stream_id) -> tuple:
    return tuple(stream_id) if isinstance(stream_id, tuple) else (int(stream_id),)


def random_payloads(channel: ChannelConfig, count: int, length: int, stream_id=0) -> np.ndarray:
    rng = generator(channel.seed, _base_key(stream_id) + (_DATA_TAG,))
    return rng.integers(0, 256, size=(count, length), dtype=np.uint8)


def _drive_block(sender, receiver, channel, inputs, n_carried, base, t0, budget) -> BlockTrace:
    trace = BlockTrace(len(inputs), receiver=receiver)
    if budget < 1:
        return trace
    outcome = run_cycle(sender, receiver, channel, inputs, base + (t0,), n_carried)
    trace.iterations.append(outcome)
    last_sent = outcome.sent_count
    while not outcome.decoded and len(trace.iterations) < budget:
        stream = base + (t0 + len(trace.iterations),)
        k = len(outcome.frs)
        if emission_size(k) < last_sent:
            outcome = run_cycle(sender, receiver, channel, sender.pending, stream, n_carried=k)
            last_sent = outcome.sent_count
        else:
            outcome = run_reemission(sender, receiver, channel, stream)
        trace.iterations.append(outcome)
    trace.terminated = outcome.decoded
    return trace


def run_block(K: int, channel: ChannelConfig, policy: BlockPolicy = BlockPolicy(),
              data=None, stream_id=0) -> BlockTrace:
    """Send one block of ``K`` packets until the receiver stops requesting.

    ``data`` defaults to random payloads drawn from the channel seed. The
    trace is marked unterminated when ``policy.max_iters`` emissions were not
    enough.
    """
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    if data is None:
        data = random_payloads(channel, K, policy.payload_len, stream_id)
    data = as_payload_array(data)
    if data.shape[0] != K:
        raise ValueError(f"expected {K} packets, got {data.shape[0]}")
    receiver = ReceiverState(policy.cost)
    return _drive_block(SenderState(), receiver, channel, data, 0, _base_key(stream_id), 0, policy.max_iters)


def run_stream(message, K: int, channel: ChannelConfig, policy: BlockPolicy = BlockPolicy(),
               stream_id=0) -> StreamTrace:
    """Send a long message through chained blocks of ``K`` packets.

    Each cycle carries the previous FRS plus ``K - k`` fresh packets. Once
    fewer than ``K`` packets remain they are sent with :func:`run_block`'s
    many-cycle procedure. ``policy.max_iters`` bounds the total number of
    emissions.
    """
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    msg = as_payload_array(message)
    if msg.shape[0] == 0:
        raise ValueError("message must not be empty")
    base = _base_key(stream_id)
    sender, receiver = SenderState(), ReceiverState(policy.cost)
    trace = StreamTrace(msg.shape[0], K, receiver=receiver)
    carried = msg[:0]
    pos = 0
    while len(carried) + (len(msg) - pos) >= K:
        if len(trace.cycles) >= policy.max_iters:
            return trace
        take = K - len(carried)
        block = np.concatenate([carried, msg[pos:pos + take]])
        pos += take
        outcome = run_cycle(sender, receiver, channel, block, base + (len(trace.cycles),), len(carried))
        trace.cycles.append(outcome)
        carried = sender.pending
    remainder = np.concatenate([carried, msg[pos:]])
    if len(remainder) == 0:
        trace.tail = BlockTrace(0, terminated=True, receiver=receiver)
    else:
        trace.tail = _drive_block(sender, receiver, channel, remainder, len(carried), base,
                                  len(trace.cycles), policy.max_iters - len(trace.cycles))
    trace.terminated = trace.tail.terminated
    return trace


def reconstruct(receiver: ReceiverState) -> np.ndarray:
    """Unwind the FRS chain from the last level back to the first.

    Returns the fresh payloads of every level in transmission order, i.e. the
    original block or message.
    """
    levels = receiver.levels
    if not levels or not levels[-1].complete:
        raise RuntimeError("transmission has not terminated; nothing to reconstruct")
    carried = None
    chunks = []
    for lvl in reversed(levels):
        payload = lvl.payload.copy()
        known = lvl.known.copy()
        if lvl.frs:
            if carried is None or len(carried) != len(lvl.frs):
                raise RuntimeError("repair chain is inconsistent")
            c = lvl.params.coord_table()[list(lvl.frs)]
            payload[c[:, 0], c[:, 1]] = carried
            known[c[:, 0], c[:, 1]] = True
        peel_inplace(payload, known)
        if not known.all():
            raise RuntimeError("level does not decode with its repair set")
        coords = lvl.params.coord_table()[:lvl.n_inputs]
        inputs = payload[coords[:, 0], coords[:, 1]]
        carried = inputs[:lvl.n_carried]
        chunks.append(inputs[lvl.n_carried:])
    receiver.delivered = np.concatenate(chunks[::-1])
    return receiver.delivered

