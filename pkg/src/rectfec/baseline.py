"""Pure retransmission baseline (selective repeat, no coding).

Every round resends exactly the packets still missing at the receiver.
"""
from __future__ import annotations

import numpy as np

from .channel import ChannelConfig
from .feedback import FeedbackRepairSet
from .protocol import DEFAULT_MAX_ITERS, BlockTrace, CycleOutcome, _base_key


def run_tcp_block(K: int, channel: ChannelConfig, max_iters: int = DEFAULT_MAX_ITERS,
                  stream_id=0, packet_len: int = 1) -> BlockTrace:
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    base = _base_key(stream_id)
    missing = np.arange(K)
    trace = BlockTrace(K)
    while len(missing) and trace.n_iterations < max_iters:
        lost = channel.packet_losses(len(missing), base + (trace.n_iterations,), packet_len)
        sent = len(missing)
        missing = missing[lost]
        request = FeedbackRepairSet(frozenset(missing.tolist()), len(missing))
        trace.iterations.append(CycleOutcome(sent, request, not len(missing)))
    trace.terminated = not len(missing)
    return trace


def expected_tcp_iterations(K: int, p: float, tol: float = 1e-15) -> float:
    """Mean number of rounds, the expected maximum of ``K`` geometric variables.

    ``sum_{t>=0} 1 - (1 - p**t)**K`` (the ``t = 0`` term is 1), summed until the terms drop below ``tol``.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must be in [0, 1), got {p}")
    total, t = 1.0, 1
    while True:
        term = -np.expm1(K * np.log1p(-p**t)) if p > 0 else 0.0
        total += term
        if term < tol:
            return total
        t += 1


def tcp_iterations_variance(K: int, p: float, tol: float = 1e-15) -> float:
    """Variance of the number of rounds, from its tail probabilities."""
    # P(T > t) = 1 - (1 - p^t)^K;  E[T^2] = sum_{t>=0} (2t+1) P(T > t)
    mean = expected_tcp_iterations(K, p, tol)
    second, t = 1.0, 1
    while True:
        tail = -np.expm1(K * np.log1p(-p**t)) if p > 0 else 0.0
        second += (2 * t + 1) * tail
        if tail < tol:
            return second - mean * mean
        t += 1
