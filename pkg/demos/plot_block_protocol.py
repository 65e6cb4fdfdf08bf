"""
Sending a block until it arrives
================================

Each round the sender emits a coded grid and the receiver answers with the
smallest set of packets that unblocks its decoder. Those packets are
re-encoded as a smaller grid, and so on. At the end the receiver unwinds the
chain of grids from the last one back to the first.
"""

import numpy as np

from rectfec import BlockPolicy, ChannelConfig, reconstruct, run_block

rng = np.random.default_rng(1)
data = rng.integers(0, 256, size=(256, 64), dtype=np.uint8)
channel = ChannelConfig.erasure(0.3, seed=2)

trace = run_block(256, channel, BlockPolicy(payload_len=64), data=data)
for t, c in enumerate(trace.iterations, 1):
    kind = "repeat" if c.reemitted else "encode"
    print(f"round {t}: {kind:6s} sent {c.sent_count:4d}  requested {len(c.frs)}")

print("terminated:", trace.terminated, "total sent", trace.total_sent)
assert np.array_equal(reconstruct(trace.receiver), data)

###############################################################################
# Average number of rounds over many blocks.

rounds = [run_block(256, channel, BlockPolicy(payload_len=8), stream_id=s).n_iterations
          for s in range(300)]
print("mean rounds at p=0.3:", np.mean(rounds))
