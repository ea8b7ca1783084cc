"""Numba kernels for the sparse random two-layer network.

Connectivity is never materialized.  Each input column i of a layer owns a
counter-based splitmix64 stream keyed by (layer_state, i); scanning that
stream with geometric gaps reproduces, exactly, the model "each edge exists
with probability 2p, positive or inhibitory with probability p each".  Edge
signs for a fixed (layer, source, target) triple are therefore pure
functions of the layer seed, which is what makes lazy regeneration, pair
deltas, and any parallel schedule agree bit-for-bit.
"""

import math

import numba as nb
import numpy as np

GOLD = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
COLK = np.uint64(0xD1B54A32D192ED03)
_INV53 = 1.0 / 9007199254740992.0  # 2^-53


@nb.njit(nb.uint64(nb.uint64), cache=True, inline="always")
def _mix(s):
    z = s
    z = (z ^ (z >> np.uint64(30))) * MIX1
    z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


@nb.njit(cache=True)
def accumulate_drive(layer_state, n, two_p, cols, deltas, pos_drive, neg_drive):
    """Add (or subtract) the synaptic drive of the given source columns.

    For each column, targets are the successes of a Bernoulli(two_p) scan
    over the n output rows, generated by geometric gap skipping; one 64-bit
    draw per edge supplies both the gap (bits 11..63) and the sign (bit 0).
    `deltas[k]` is +1 to add column `cols[k]`, -1 to remove it, which is how
    a pair of nearby inputs shares one pass of generation work.
    """
    full = two_p >= 1.0
    log1m = 0.0 if full else math.log1p(-two_p)
    for k in range(cols.shape[0]):
        d = deltas[k]
        s = _mix(layer_state + COLK * (np.uint64(cols[k]) + np.uint64(1)))
        j = -1
        while True:
            s = s + GOLD
            z = _mix(s)
            if full:
                j += 1
            else:
                u = (float(z >> np.uint64(11)) + 1.0) * _INV53
                j += 1 + int(math.log(u) / log1m)
            if j >= n:
                break
            if z & np.uint64(1):
                pos_drive[j] += d
            else:
                neg_drive[j] += d


@nb.njit(cache=True)
def column_edges(layer_state, n, two_p, col, targets, signs):
    """Materialize one column's edge list (for queries and tests).

    Fills the preallocated arrays and returns the edge count.  Replays the
    identical stream as `accumulate_drive`.
    """
    full = two_p >= 1.0
    log1m = 0.0 if full else math.log1p(-two_p)
    s = _mix(layer_state + COLK * (np.uint64(col) + np.uint64(1)))
    j = -1
    count = 0
    while True:
        s = s + GOLD
        z = _mix(s)
        if full:
            j += 1
        else:
            u = (float(z >> np.uint64(11)) + 1.0) * _INV53
            j += 1 + int(math.log(u) / log1m)
        if j >= n:
            break
        targets[count] = j
        signs[count] = 1 if z & np.uint64(1) else -1
        count += 1
    return count
