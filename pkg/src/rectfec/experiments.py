"""Protocol-vs-retransmission sweeps over a uniformly random erasure rate.

Every trial draws ``p`` uniformly in ``(0, 1)`` and runs both the coded
protocol and the pure retransmission baseline on independent channel streams.
Results are binned by ``p``. Per-trial counts are integers, so merging the
chunks in any order gives identical tables.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baseline import run_tcp_block
from .channel import ChannelConfig, generator
from .protocol import DEFAULT_MAX_ITERS, BlockPolicy, run_block

CSV_COLUMNS = ["K", "p_bin", "e_K", "i_K_ours", "i_K_tcp", "iter_ratio", "sent_ratio", "trials"]

_P_STREAM, _OURS_STREAM, _TCP_STREAM = 0, 1, 2


def trial_p(seed: int, K: int, trial: int) -> float:
    rng = generator(seed, (K, trial, _P_STREAM))
    while True:
        p = rng.random()
        if p > 0.0:
            return p


@dataclass(frozen=True)
class TrialResult:
    p: float
    iters_ours: int
    iters_tcp: int
    sent_ours: int
    sent_tcp: int
    terminated: bool


def run_trial(K: int, trial: int, seed: int, max_iters: int = DEFAULT_MAX_ITERS,
              payload_len: int = 8, p: float | None = None) -> TrialResult:
    if p is None:
        p = trial_p(seed, K, trial)
    channel = ChannelConfig.erasure(p, seed)
    ours = run_block(K, channel, BlockPolicy(max_iters=max_iters, payload_len=payload_len),
                     stream_id=(K, trial, _OURS_STREAM))
    tcp = run_tcp_block(K, channel, max_iters, stream_id=(K, trial, _TCP_STREAM))
    return TrialResult(p, ours.n_iterations, tcp.n_iterations, ours.total_sent, tcp.total_sent,
                       ours.terminated and tcp.terminated)


def _run_chunk(args):
    K, start, stop, seed, max_iters, payload_len, p = args
    return [run_trial(K, t, seed, max_iters, payload_len, p) for t in range(start, stop)]


def run_trials(K: int, trials: int, seed: int, max_iters: int = DEFAULT_MAX_ITERS,
               payload_len: int = 8, workers: int = 1, chunk: int = 256,
               p: float | None = None) -> list[TrialResult]:
    """Trial ``t`` depends only on ``(seed, K, t)``; results come back in trial order.

    A fixed ``p`` replaces the uniform draw.
    """
    jobs = [(K, s, min(s + chunk, trials), seed, max_iters, payload_len, p)
            for s in range(0, trials, chunk)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    return [r for part in parts for r in part]


def bin_results(K: int, results: list[TrialResult], bins: int = 100) -> list[dict]:
    table = {}
    for r in results:
        b = min(int(r.p * bins), bins - 1)
        acc = table.setdefault(b, [0, 0, 0, 0, 0])
        acc[0] += r.iters_ours
        acc[1] += r.iters_tcp
        acc[2] += r.sent_ours
        acc[3] += r.sent_tcp
        acc[4] += 1
    rows = []
    for b in sorted(table):
        io_, it, so, st, count = table[b]
        rows.append({
            "K": K,
            "p_bin": (b + 0.5) / bins,
            "e_K": so / (count * K),
            "i_K_ours": io_ / count,
            "i_K_tcp": it / count,
            "iter_ratio": io_ / it,
            "sent_ratio": so / st,
            "trials": count,
        })
    return rows


def experiment_sweep(K_list, trials: int = 10_000, seed: int = 0, bins: int = 100,
                     max_iters: int = DEFAULT_MAX_ITERS, payload_len: int = 8,
                     workers: int = 1) -> list[dict]:
    """Binned e_K, i_K and ours/baseline ratios for every ``K`` in ``K_list``.

    Payload contents do not influence the counts, so a short ``payload_len``
    is used by default.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rows = []
    for K in K_list:
        results = run_trials(K, trials, seed, max_iters, payload_len, workers)
        rows.extend(bin_results(K, results, bins))
    return rows


def average_iteration_ratio(rows: list[dict], K: int) -> float:
    """Iteration ratio curve averaged over ``p``, weighting bins by their trials."""
    sel = [r for r in rows if r["K"] == K]
    total = sum(r["trials"] for r in sel)
    return sum(r["iter_ratio"] * r["trials"] for r in sel) / total


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([
            r["K"], f"{r['p_bin']:.4f}", f"{r['e_K']:.6f}", f"{r['i_K_ours']:.6f}",
            f"{r['i_K_tcp']:.6f}", f"{r['iter_ratio']:.6f}", f"{r['sent_ratio']:.6f}", r["trials"],
        ])
    return buf.getvalue()


def summarize(results: list[TrialResult]) -> dict:
    ours = np.array([r.iters_ours for r in results], dtype=float)
    tcp = np.array([r.iters_tcp for r in results], dtype=float)
    return {
        "i_ours": ours.mean(),
        "i_tcp": tcp.mean(),
        "se_ours": ours.std(ddof=1) / np.sqrt(len(ours)) if len(ours) > 1 else 0.0,
        "se_tcp": tcp.std(ddof=1) / np.sqrt(len(tcp)) if len(tcp) > 1 else 0.0,
        "terminated": sum(r.terminated for r in results),
    }
