"""Command line entry point: ``rectfec <command> ...``.

Exit status: 0 on success, 1 when a block cannot be decoded, 2 on invalid
arguments, 3 when an exhaustive computation is too large.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import analysis
from .baseline import run_tcp_block
from .channel import ChannelConfig
from .codec import CodeGrid, CodeParams, decode_peel, encode_block
from .core import DEFAULT_LEN, ResourceLimitError, Status, read_block, write_block
from .experiments import experiment_sweep, to_csv
from .feedback import CostFunction, build_gadget, min_frs_unit, min_frs_weighted
from .protocol import DEFAULT_MAX_ITERS, BlockPolicy, reconstruct, run_block, run_stream


def _channel(args) -> ChannelConfig:
    if getattr(args, "pb", None) is not None:
        return ChannelConfig.bitflip(args.pb, args.seed)
    return ChannelConfig.erasure(args.p if args.p is not None else 0.0, args.seed)


def _emit(args, records: list[dict], out=None):
    out = out or sys.stdout
    if args.csv and records:
        writer = csv.DictWriter(out, fieldnames=list(records[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(records)
    else:
        for r in records:
            out.write(json.dumps(r) + "\n")


def _grid_from_block(n, m, n_inputs, payloads, statuses) -> CodeGrid:
    params = CodeParams(n, m)
    c = params.coord_table()
    payload = np.zeros(params.shape + (payloads.shape[1],), dtype=np.uint8)
    payload[c[:, 0], c[:, 1]] = payloads
    status = np.zeros(params.shape, dtype=np.int8)
    status[c[:, 0], c[:, 1]] = statuses
    sent = np.ones(params.shape, dtype=bool)
    pads = c[n_inputs:params.K]
    sent[pads[:, 0], pads[:, 1]] = False
    return CodeGrid(params, payload, status, sent)


def cmd_encode(args):
    data = open(args.input, "rb").read()
    length = args.len
    count = max(1, math.ceil(len(data) / length))
    raw = np.zeros(count * length, dtype=np.uint8)
    raw[:len(data)] = np.frombuffer(data, dtype=np.uint8)
    grid = encode_block(raw.reshape(count, length))
    if args.p is not None or args.pb is not None:
        grid = _channel(args).transmit(grid, 0)
    params = grid.params
    c = params.coord_table()
    with open(args.output, "wb") as fh:
        write_block(fh, params.n, params.m, grid.n_inputs,
                    grid.payload[c[:, 0], c[:, 1]], grid.status[c[:, 0], c[:, 1]])
    _emit(args, [{
        "K": grid.n_inputs, "n": params.n, "m": params.m, "len": length, "pad": grid.pad_count,
        "sent": grid.sent_count, "erroneous": int(np.count_nonzero(grid.status != Status.CORRECT)),
        "bytes": len(data),
    }])
    return 0


def _read_grid(path):
    with open(path, "rb") as fh:
        return _grid_from_block(*read_block(fh))


def cmd_decode(args):
    grid = _read_grid(args.block)
    result = decode_peel(grid)
    if not result.success:
        index = grid.params.index_table()
        _emit(args, [{"decoded": False,
                      "residual": sorted(int(index[c]) for c in result.residual.errors)}])
        return 1
    data = result.repaired.sources().tobytes()
    if args.size is not None:
        data = data[:args.size]
    with open(args.output, "wb") as fh:
        fh.write(data)
    _emit(args, [{"decoded": True, "bytes": len(data)}])
    return 0


def cmd_minfrs(args):
    grid = _read_grid(args.block)
    result = decode_peel(grid)
    cost = CostFunction(args.cost)
    if cost is CostFunction.GRADED:
        raise ValueError("block files carry no corruption masks; graded cost is unavailable")
    g = build_gadget(result.residual, grid.params, cost)
    frs = min_frs_unit(g) if cost is CostFunction.ALL_OR_NONE else min_frs_weighted(g)
    _emit(args, [{"frs": list(frs.indices), "cost": str(Fraction(frs.cost)),
                  "cost_value": float(frs.cost)}])
    return 0


def _p_value(args):
    return args.p if args.pb is None else None


def cmd_simulate_block(args):
    cost = CostFunction(args.cost)
    if cost is CostFunction.GRADED and args.pb is None:
        raise ValueError("graded cost needs a bit-flip channel (--pb)")
    channel = _channel(args)
    policy = BlockPolicy(cost, args.max_iters, args.len)
    records = []
    for t in range(args.trials):
        trace = run_block(args.K, channel, policy, stream_id=t)
        records.append({"K": args.K, "p": _p_value(args), "seed": args.seed, "trial": t,
                        "iterations": trace.n_iterations, "total_sent": trace.total_sent,
                        "terminated": trace.terminated})
    _emit(args, records)
    return 0


def cmd_simulate_stream(args):
    channel = _channel(args)
    policy = BlockPolicy(CostFunction.ALL_OR_NONE, args.max_iters, args.len)
    rng = np.random.default_rng(args.seed)
    records = []
    for t in range(args.trials):
        message = rng.integers(0, 256, (args.message_packets, args.len), dtype=np.uint8)
        trace = run_stream(message, args.K, channel, policy, stream_id=t)
        ok = bool(trace.terminated and np.array_equal(reconstruct(trace.receiver), message))
        records.append({"K": args.K, "p": _p_value(args), "seed": args.seed, "trial": t,
                        "message_packets": args.message_packets, "iterations": trace.n_iterations,
                        "total_sent": trace.total_sent, "terminated": trace.terminated,
                        "delivered_ok": ok})
    _emit(args, records)
    return 0


def cmd_simulate_tcp(args):
    channel = _channel(args)
    records = []
    for t in range(args.trials):
        trace = run_tcp_block(args.K, channel, args.max_iters, stream_id=t, packet_len=args.len)
        records.append({"K": args.K, "p": _p_value(args), "seed": args.seed, "trial": t,
                        "iterations": trace.n_iterations, "total_sent": trace.total_sent,
                        "terminated": trace.terminated})
    _emit(args, records)
    return 0


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ValueError(f"--formula {args.formula} needs " + ", ".join("--" + n for n in missing))


def cmd_analyze(args):
    f = args.formula
    if f == "law-ne":
        _need(args, "N", "p", "ne")
        value = analysis.law_ne(args.N, Fraction(args.p), args.ne, exact=True)
    elif f in ("exp-c", "exp-r", "eq3"):
        _need(args, "n", "m", "ne")
        fn = {"exp-c": analysis.exp_cols_given_ne, "exp-r": analysis.exp_rows_given_ne,
              "eq3": analysis.expected_I_regime3}[f]
        value = fn(args.n, args.m, args.ne, exact=True)
    elif f == "lambda":
        _need(args, "x")
        value = analysis.lambda_of_x(args.x)
    else:
        _need(args, "n", "m", "ne")
        count = analysis.count_acyclic_subgraphs(args.n, args.m, args.ne)
        total = math.comb((args.n + 1) * (args.m + 1), args.ne)
        _emit(args, [{"formula": f, "count": count, "exact": str(Fraction(count, total)),
                      "value": count / total}])
        return 0
    exact = str(value) if isinstance(value, Fraction) else None
    _emit(args, [{"formula": f, "exact": exact, "value": float(value)}])
    return 0


def cmd_mc(args):
    stats = analysis.mc_conditional(args.n, args.m, args.ne, args.trials, args.seed, args.statistic)
    _emit(args, [stats.as_dict()])
    return 0


def cmd_sweep(args):
    rows = experiment_sweep(args.K, args.trials, args.seed, args.bins, args.max_iters,
                            args.len, args.workers)
    text = to_csv(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON lines output (default)")
    fmt.add_argument("--csv", action="store_true", help="CSV output")
    common.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)

    chan = argparse.ArgumentParser(add_help=False)
    chan.add_argument("--p", type=float, default=None, help="packet erasure probability")
    chan.add_argument("--pb", type=float, default=None, help="bit flip probability")

    parser = argparse.ArgumentParser(prog="rectfec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", parents=[common, chan], help="encode a file into a block file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--len", type=int, default=DEFAULT_LEN)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="peel a block file and write the sources")
    p.add_argument("block")
    p.add_argument("output")
    p.add_argument("--size", type=int, default=None, help="truncate output to this many bytes")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("minfrs", parents=[common], help="print a minimum feedback repair set")
    p.add_argument("block")
    p.add_argument("--cost", default="all-or-none", choices=[c.value for c in CostFunction])
    p.set_defaults(func=cmd_minfrs)

    for name, func in (("simulate-block", cmd_simulate_block), ("simulate-tcp", cmd_simulate_tcp)):
        p = sub.add_parser(name, parents=[common, chan])
        p.add_argument("--K", type=int, required=True)
        p.add_argument("--trials", type=int, default=1)
        p.add_argument("--len", type=int, default=64, help="payload bytes per packet")
        if func is cmd_simulate_block:
            p.add_argument("--cost", default="all-or-none", choices=[c.value for c in CostFunction])
        p.set_defaults(func=func)

    p = sub.add_parser("simulate-stream", parents=[common, chan])
    p.add_argument("--message-packets", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--len", type=int, default=64)
    p.set_defaults(func=cmd_simulate_stream)

    p = sub.add_parser("analyze", parents=[common], help="evaluate a closed-form quantity")
    p.add_argument("--formula", required=True,
                   choices=["law-ne", "exp-c", "exp-r", "eq3", "lambda", "forests"])
    p.add_argument("--N", type=int)
    p.add_argument("--p", type=str, help="probability, decimal or fraction")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--ne", type=int)
    p.add_argument("--x", type=float)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo estimate given the error count")
    p.add_argument("--statistic", default="expected-i", choices=[s.value for s in analysis.Statistic])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--ne", type=int, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("sweep", parents=[common], help="protocol vs retransmission table (CSV)")
    p.add_argument("--K", type=int, nargs="+", default=[16, 64, 256])
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--len", type=int, default=8)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"rectfec: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"rectfec: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
