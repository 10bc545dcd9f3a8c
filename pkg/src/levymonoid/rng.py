"""Counter-based random streams for reproducible parallel sampling.

Every random quantity in the library is drawn from a stream addressed by
(master_seed, purpose, replicate, branch).  Streams are numpy Philox
generators: the 128-bit key carries (seed, replicate) and the 256-bit
counter starts at (0, branch, purpose, 0), so distinct addresses never
overlap and each stream has 2**64 blocks of headroom before it could
touch the branch word.  A realization is therefore a pure function of its
address, independent of worker count or evaluation order.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# Purpose tags.  Never reuse a tag for a different kind of draw.
STREAM_LAYER = 1      # PPP layer sampling: branch = layer slot
STREAM_INTEGRAL = 2   # Monte Carlo integration of (1 - chi) against a layer
STREAM_KILL = 3       # exponential killing times (moment checks)
STREAM_IID = 4        # i.i.d. element blocks (invariance principle)
STREAM_SAMPLE = 5     # property-test element sampling
STREAM_MISC = 6

# Layer slots within one replicate: branch = path_branch * BRANCH_STRIDE + layer.
BRANCH_STRIDE = 1 << 20


def substream(seed: int, purpose: int, replicate: int = 0, branch: int = 0) -> np.random.Generator:
    """Return the generator addressed by (seed, purpose, replicate, branch)."""
    key = np.array([seed & MASK64, replicate & MASK64], dtype=np.uint64)
    counter = np.array([0, branch & MASK64, purpose & MASK64, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def layer_stream(seed: int, replicate: int, layer: int, path_branch: int = 0) -> np.random.Generator:
    """Stream feeding layer `layer` of path copy `path_branch` in one replicate."""
    if layer >= BRANCH_STRIDE:
        raise ValueError(f"layer index {layer} exceeds stride {BRANCH_STRIDE}")
    return substream(seed, STREAM_LAYER, replicate, path_branch * BRANCH_STRIDE + layer)
