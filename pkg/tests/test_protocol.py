import numpy as np
import pytest

from conftest import ScriptedChannel
from rectfec.channel import ChannelConfig
from rectfec.codec import CodeParams, emission_size
from rectfec.feedback import CostFunction
from rectfec.protocol import (
    BlockPolicy,
    ReceiverState,
    SenderState,
    reconstruct,
    run_block,
    run_cycle,
    run_stream,
)

# 10 cells over rows 0-3 and columns 0-3, every row and column hit at least
# twice: an 8-cycle plus two chords, cyclomatic number 10 - 8 + 1 = 3
STOPPING_SET = [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 3), (3, 3), (3, 0), (0, 2), (1, 3)]
PEELABLE = [(5, 5), (6, 4)]
# three requested packets are re-encoded on a 3x3 grid whose pad sits at (1, 1)
CORNERS = [(0, 0), (0, 2), (2, 0), (2, 2)]

POLICY = BlockPolicy(payload_len=16)


def data(K, seed=0, length=16):
    return np.random.default_rng(seed).integers(0, 256, size=(K, length), dtype=np.uint8)


def test_three_iteration_scenario():
    src = data(36)
    channel = ScriptedChannel([STOPPING_SET + PEELABLE, CORNERS, []])
    trace = run_block(36, channel, POLICY, data=src)
    assert trace.terminated and trace.n_iterations == 3
    sent = [c.sent_count for c in trace.iterations]
    assert sent == [49, 8, 4]
    assert [len(c.frs) for c in trace.iterations] == [3, 1, 0]
    assert not any(c.reemitted for c in trace.iterations)
    levels = trace.receiver.levels
    assert [lvl.params for lvl in levels] == [CodeParams(6, 6), CodeParams(2, 2), CodeParams(1, 1)]
    assert levels[0].frs == trace.iterations[0].frs.indices
    # level 2 is decoded first, then level 1
    assert np.array_equal(reconstruct(trace.receiver), src)


def test_first_cycle_requests_three():
    sender, receiver = SenderState(), ReceiverState()
    out = run_cycle(sender, receiver, ScriptedChannel([STOPPING_SET + PEELABLE]), data(36))
    assert out.sent_count == 49 and len(out.frs) == 3 and not out.decoded
    # the sender keeps exactly the requested packets
    assert sender.pending.shape == (3, 16)
    assert sender.pending_index == out.frs.indices


def test_lossless_cycle():
    sender, receiver = SenderState(), ReceiverState()
    out = run_cycle(sender, receiver, ChannelConfig.erasure(0.0), data(30))
    assert out.decoded and not out.frs
    assert out.sent_count == 49 - 6


def test_all_erased_requests_k():
    sender, receiver = SenderState(), ReceiverState()
    out = run_cycle(sender, receiver, ChannelConfig.erasure(1.0), data(25))
    assert out.frs.cost == 25


def test_lossless_block_one_iteration():
    src = data(36)
    trace = run_block(36, ChannelConfig.erasure(0.0), POLICY, data=src)
    assert trace.terminated and trace.n_iterations == 1 and trace.total_sent == 49
    assert np.array_equal(reconstruct(trace.receiver), src)


def test_cap_leaves_trace_unterminated():
    trace = run_block(16, ChannelConfig.erasure(1.0), BlockPolicy(max_iters=50, payload_len=4))
    assert not trace.terminated and trace.n_iterations == 50
    with pytest.raises(RuntimeError):
        reconstruct(trace.receiver)


def test_repeat_when_reencoding_does_not_shrink():
    # every cell lost: k = K, so the same emission is repeated and merged
    channel = ScriptedChannel([[(i, j) for i in range(3) for j in range(3)], []])
    src = data(4)
    trace = run_block(4, channel, POLICY, data=src)
    assert trace.terminated and trace.n_iterations == 2
    assert trace.iterations[1].reemitted and trace.iterations[1].sent_count == 9
    assert len(trace.receiver.levels) == 1
    assert np.array_equal(reconstruct(trace.receiver), src)


def test_emission_sizes_never_grow():
    for seed in range(30):
        trace = run_block(64, ChannelConfig.erasure(0.45, seed), POLICY)
        sizes = [c.sent_count for c in trace.iterations]
        assert all(b <= a for a, b in zip(sizes, sizes[1:]))
        for prev, cur in zip(trace.iterations, trace.iterations[1:]):
            if not cur.reemitted:
                assert cur.sent_count == emission_size(len(prev.frs))


@pytest.mark.parametrize("p", [0.1, 0.3, 0.6])
def test_block_reconstruction_random(p):
    for seed in range(100):
        src = data(50, seed, 8)
        trace = run_block(50, ChannelConfig.erasure(p, seed), BlockPolicy(payload_len=8), data=src)
        if trace.terminated:
            assert np.array_equal(reconstruct(trace.receiver), src)


def test_modified_cost_block():
    src = data(36)
    for seed in range(20):
        trace = run_block(36, ChannelConfig.erasure(0.4, seed), BlockPolicy(CostFunction.MODIFIED_ALL_OR_NONE, payload_len=16), data=src)
        assert trace.terminated
        assert np.array_equal(reconstruct(trace.receiver), src)


def test_graded_cost_block():
    src = data(25)
    for seed in range(10):
        trace = run_block(25, ChannelConfig.bitflip(0.002, seed), BlockPolicy(CostFunction.GRADED, payload_len=16), data=src)
        assert trace.terminated
        assert np.array_equal(reconstruct(trace.receiver), src)


def test_graded_cost_needs_bitflip_channel():
    with pytest.raises(ValueError):
        run_block(25, ChannelConfig.erasure(0.5, 1), BlockPolicy(CostFunction.GRADED, payload_len=4))


def test_stream_two_blocks_lossless():
    msg = data(32)
    trace = run_stream(msg, 16, ChannelConfig.erasure(0.0), POLICY)
    assert trace.terminated and trace.stages == 3
    assert len(trace.cycles) == 2 and trace.tail.n_iterations == 0
    assert np.array_equal(reconstruct(trace.receiver), msg)


@pytest.mark.parametrize("K", [16, 36])
def test_stream_of_one_block_matches_block(K):
    for seed in range(20):
        msg = data(K, seed)
        channel = ChannelConfig.erasure(0.3, seed)
        block = run_block(K, channel, POLICY, data=msg, stream_id=seed)
        stream = run_stream(msg, K, channel, POLICY, stream_id=seed)
        assert [c.sent_count for c in block.iterations] == \
            [c.sent_count for c in stream.cycles] + [c.sent_count for c in stream.tail.iterations]
        assert stream.total_sent == block.total_sent
        assert np.array_equal(reconstruct(stream.receiver), reconstruct(block.receiver))


def test_stream_reconstruction_random():
    for seed in range(100):
        msg = data(10 * 64 + seed % 7, seed, 8)
        trace = run_stream(msg, 64, ChannelConfig.erasure(0.3, seed), BlockPolicy(payload_len=8))
        assert trace.terminated
        assert np.array_equal(reconstruct(trace.receiver), msg)


def test_stream_carries_only_requests():
    msg = data(200, 3, 8)
    trace = run_stream(msg, 36, ChannelConfig.erasure(0.2, 3), BlockPolicy(payload_len=8))
    levels = trace.receiver.levels
    for prev, lvl in zip(levels, levels[1:]):
        assert lvl.n_carried == len(prev.frs)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        run_block(0, ChannelConfig.erasure(0.1))
    with pytest.raises(ValueError):
        run_block(4, ChannelConfig.erasure(0.1), POLICY, data=data(3))
    with pytest.raises(ValueError):
        BlockPolicy(max_iters=0)
    with pytest.raises(ValueError):
        run_stream(data(0), 4, ChannelConfig.erasure(0.1))
