"""
Encoding a block and peeling erasures
=====================================

A block of K packets is laid out on an n x n grid, one parity per row, one
per column, and one overall parity. The peeling decoder repairs any lost
packet that is alone in its row or column.
"""

import numpy as np

from rectfec import ChannelConfig, Status, classify, decode_peel, encode_block

rng = np.random.default_rng(0)
packets = rng.integers(0, 256, size=(30, 32), dtype=np.uint8)

# 30 packets need a 6 x 6 source area; the last 6 slots are zero padding
# that is never sent
grid = encode_block(packets)
print("code", grid.params, "pad", grid.pad_count, "sent", grid.sent_count)
print("rate", round(grid.params.rate, 3))

# every row and every column xors to zero
print("parity ok:", grid.parity_ok())

###############################################################################
# Lose some packets and peel.

rx = ChannelConfig.erasure(0.15, seed=4).transmit(grid)
lost = rx.error_configuration()
print("erased", lost.n_errors, "->", classify(lost).value)

result = decode_peel(rx)
print("left after peeling:", sorted(result.residual.errors))
if result.success:
    assert np.array_equal(result.repaired.sources()[:30], packets)
    print("all sources recovered")

###############################################################################
# Four erasures on the corners of a rectangle block the decoder: each shares
# its row and its column with another one.

stuck = grid.copy()
for cell in [(0, 0), (0, 3), (2, 0), (2, 3)]:
    stuck.status[cell] = Status.ERASED
print(classify(stuck.error_configuration()).value,
      sorted(decode_peel(stuck).residual.errors))
