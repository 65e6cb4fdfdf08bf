"""Acceptance criteria, each at its stated tolerance.

Every test records a ``PASS``/``FAIL`` line that is printed in the terminal
summary. Run just this module with ``pytest tests/test_acceptance.py``.
"""
import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from rectfec.analysis import (
    brute_force_min_frs,
    exhaustive_min_repair_costs,
    exp_cols_given_ne,
    exp_rows_given_ne,
    expected_I_regime3,
    lambda_of_x,
    mc_conditional,
    prob_good_given_ne,
)
from rectfec.baseline import expected_tcp_iterations, run_tcp_block, tcp_iterations_variance
from rectfec.channel import ChannelConfig
from rectfec.cli import main as cli_main
from rectfec.codec import CodeParams, classify
from rectfec.core import ErrorConfiguration
from rectfec.experiments import average_iteration_ratio, bin_results, experiment_sweep, run_trials
from rectfec.feedback import build_gadget, gadget_from_arrays, min_frs_unit, min_frs_weighted, repair_cost_formula
from rectfec.protocol import BlockPolicy, reconstruct, run_block, run_stream


def report(num: int, title: str, ok: bool, detail: str):
    ACCEPTANCE_LINES.append(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")
    assert ok, f"criterion {num} ({title}): {detail}"


def configs_from_bits(n, m):
    N = (n + 1) * (m + 1)
    for s in range(1 << N):
        mask = ((s >> np.arange(N)) & 1).astype(bool).reshape(n + 1, m + 1)
        yield s, mask


def unit_cost(mask, index, n, m):
    rows, cols = np.nonzero(mask)
    return min_frs_unit(gadget_from_arrays(n, m, rows, cols, index[rows, cols])).cost


def test_c01_unit_solver_optimal_exhaustive():
    mismatches, checked = 0, 0
    # n = m = 2: the subset-enumeration oracle on every configuration
    p2 = CodeParams(2, 2)
    idx = p2.index_table()
    for s, mask in configs_from_bits(2, 2):
        cfg = ErrorConfiguration.from_mask(mask)
        mismatches += unit_cost(mask, idx, 2, 2) != brute_force_min_frs(cfg, p2).cost
        checked += 1
    # n = m = 3: all 2^16 configurations against the exhaustive subset table,
    # which is itself cross-checked against the per-configuration oracle
    table = exhaustive_min_repair_costs(3, 3)
    p3 = CodeParams(3, 3)
    idx = p3.index_table()
    rng = random.Random(3)
    sample = set(rng.sample(range(1 << 16), 1500))
    for s, mask in configs_from_bits(3, 3):
        cost = unit_cost(mask, idx, 3, 3)
        mismatches += cost != table[s]
        if s in sample:
            mismatches += table[s] != brute_force_min_frs(ErrorConfiguration.from_mask(mask), p3).cost
        checked += 1
    report(1, "min_frs_unit equals brute force on all configurations, n=m=2,3", mismatches == 0,
           f"{checked} configurations, {mismatches} mismatches")


def test_c02_repair_cost_identity():
    rng = np.random.default_rng(2)
    bad = 0
    for _ in range(10_000):
        n, m = int(rng.integers(1, 11)), int(rng.integers(1, 11))
        cfg = ErrorConfiguration.from_mask(rng.random((n + 1, m + 1)) < rng.random())
        g = build_gadget(cfg, CodeParams(n, m))
        R, C, nscc = cfg.rows_hit, cfg.cols_hit, g.n_nonsingleton_components
        bad += min_frs_unit(g).cost != repair_cost_formula(cfg.n_errors, R, C, nscc)
        bad += g.n_components != nscc + (n + 1 - R) + (m + 1 - C)
    report(2, "cost = N_e - R - C + N_nscc and N_cc relation", bad == 0, f"10000 configurations, {bad} failures")


def test_c03_good_iff_acyclic():
    bad, checked = 0, 0
    for n in (2, 3):
        params = CodeParams(n, n)
        for s, mask in configs_from_bits(n, n):
            cfg = ErrorConfiguration.from_mask(mask)
            bad += (not classify(cfg).is_bad) != build_gadget(cfg, params).is_forest()
            checked += 1
    report(3, "good configuration iff acyclic coordinates graph", bad == 0,
           f"{checked} configurations, {bad} discrepancies")


def test_c04_weighted_solver_optimal():
    rng = random.Random(4)
    choices = [Fraction(1), Fraction(11, 10), Fraction(2), Fraction(3)]
    bad = 0
    for _ in range(1000):
        n, m = rng.randint(1, 3), rng.randint(1, 3)
        cells = [c for c in itertools.product(range(n + 1), range(m + 1)) if rng.random() < 0.6]
        weights = {c: rng.choice(choices) for c in cells}
        cfg = ErrorConfiguration.from_cells(n, m, cells)
        params = CodeParams(n, m)
        got = min_frs_weighted(build_gadget(cfg, params, weights=weights)).cost
        bad += got != brute_force_min_frs(cfg, params, weights=weights).cost
    report(4, "min_frs_weighted equals brute force (exact rationals)", bad == 0, f"1000 instances, {bad} mismatches")


def test_c05_expected_rows_and_columns():
    c = mc_conditional(9, 9, 20, 100_000, seed=5, statistic="expected-c")
    r = mc_conditional(9, 9, 20, 100_000, seed=6, statistic="expected-r")
    ec, er = exp_cols_given_ne(9, 9, 20), exp_rows_given_ne(9, 9, 20)
    zc, zr = abs(c.estimate - ec) / c.std_error, abs(r.estimate - er) / r.std_error
    report(5, "E(C|N_e), E(R|N_e) vs Monte Carlo", zc < 3 and zr < 3,
           f"C {c.estimate:.4f} vs {ec:.4f} ({zc:.2f} sigma); R {r.estimate:.4f} vs {er:.4f} ({zr:.2f} sigma)")


def test_c06_prob_good_vs_monte_carlo():
    trials, worst, bad = 20_000, 0.0, []
    for n_e in range(17):
        p = prob_good_given_ne(3, 3, n_e)
        est = mc_conditional(3, 3, n_e, trials, seed=100 + n_e, statistic="prob-i-zero").estimate
        if p in (0.0, 1.0):
            ok = est == p
        else:
            z = abs(est - p) / math.sqrt(p * (1 - p) / trials)
            worst = max(worst, z)
            ok = z < 3
        if not ok:
            bad.append(n_e)
    report(6, "P(I=0|N_e) forest count vs Monte Carlo, n=m=3", not bad,
           f"{trials} trials per n_e, worst {worst:.2f} sigma, failing n_e {bad}")


def test_c07_asymptotic_regime():
    lam = lambda_of_x(0.25)
    est = {}
    for n in (50, 100, 200):
        n_e = math.floor(0.5 * (n + 1) + 0.5)
        est[n] = mc_conditional(n, n, n_e, 200_000, seed=7 + n).estimate
    gaps = [abs(est[n] - lam) for n in (50, 100, 200)]
    ok = gaps[0] > gaps[1] > gaps[2] and abs(est[200] - lam) <= 0.5 * lam
    report(7, "E(I) approaches lambda(0.25) as n grows", ok,
           ", ".join(f"n={n}: {v:.5f}" for n, v in est.items()) + f"; lambda {lam:.6f}")


def test_c08_giant_component_regime():
    n_e = round(31 * math.log(60))
    st = mc_conditional(30, 30, n_e, 100_000, seed=8)
    ref = expected_I_regime3(30, 30, n_e)
    rel = abs(st.estimate - ref) / ref
    report(8, "E(I) vs giant-component formula, n=m=30", n_e == 127 and rel < 0.05,
           f"n_e {n_e}, mc {st.estimate:.3f}, formula {ref:.3f}, rel {rel:.4f}")


def test_c09_protocol_vs_tcp_at_fixed_p():
    res = run_trials(256, 10_000, seed=9, p=0.3)
    ours = np.mean([r.iters_ours for r in res])
    tcp = np.mean([r.iters_tcp for r in res])
    ok = 5 <= tcp <= 7 and 2.5 <= ours <= 3.5
    report(9, "K=256, p=0.3 mean iterations", ok, f"tcp {tcp:.3f} in [5,7], ours {ours:.3f} in [2.5,3.5]")


def test_c10_gain_averaged_over_p():
    rows = experiment_sweep([16, 256], trials=10_000, seed=10)
    r16, r256 = average_iteration_ratio(rows, 16), average_iteration_ratio(rows, 256)
    smoke = bin_results(65536, run_trials(65536, 100, seed=10), bins=1)
    r64k = smoke[0]["iter_ratio"]
    ok = abs(r16 - 0.40) <= 0.15 and abs(r256 - 0.50) <= 0.15 and r64k < 1
    report(10, "iteration ratio averaged over p", ok,
           f"K=16 {r16:.3f} (0.40+-0.15), K=256 {r256:.3f} (0.50+-0.15), K=65536 smoke {r64k:.3f} < 1")


def test_c11_stream_end_to_end():
    rng = np.random.default_rng(11)
    terminated = wrong = 0
    for t in range(1000):
        p = 0.5 * (1.0 - rng.random())  # uniform in (0, 0.5]
        msg = rng.integers(0, 256, size=(640, 16), dtype=np.uint8)
        trace = run_stream(msg, 64, ChannelConfig.erasure(p, 11), BlockPolicy(payload_len=16), stream_id=t)
        if trace.terminated:
            terminated += 1
            wrong += not np.array_equal(reconstruct(trace.receiver), msg)
    report(11, "stream delivery equals message whenever terminated", wrong == 0,
           f"{terminated}/1000 terminated, {wrong} mismatches")


def test_c12_tcp_closed_form():
    trials, parts, ok = 10_000, [], True
    for K, p in [(16, 0.3), (256, 0.3), (256, 0.5)]:
        cfg = ChannelConfig.erasure(p, 12)
        mean = np.mean([run_tcp_block(K, cfg, stream_id=(K, t)).n_iterations for t in range(trials)])
        ref = expected_tcp_iterations(K, p)
        z = abs(mean - ref) / math.sqrt(tcp_iterations_variance(K, p) / trials)
        ok &= z < 3
        parts.append(f"K={K} p={p}: {mean:.4f} vs {ref:.4f} ({z:.2f} sigma)")
    report(12, "retransmission mean vs closed form", ok, "; ".join(parts))


def test_c13_sweep_deterministic(tmp_path, capsys):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        argv = ["sweep", "--K", "16", "64", "--trials", "500", "--seed", "13", "--out", str(path)]
        assert cli_main(argv) == 0
        outs.append(path.read_bytes())
    capsys.readouterr()
    report(13, "repeated sweep gives byte-identical CSV", outs[0] == outs[1] and len(outs[0]) > 100,
           f"{len(outs[0])} bytes")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
