"""Counter-based random streams.

Every random draw in the package comes from a generator keyed by
``(seed, stream, counter)``, so a replication's numbers never depend on which
worker produced them or in which order.
"""

import numpy as np

STREAM_SAMPLE = 0
STREAM_POISSON = 1
STREAM_BINOMIAL = 2
STREAM_GAUSSIAN = 3

# Replications are simulated in fixed-size blocks; the block index is the
# counter. Changing this constant changes every Monte Carlo result.
BLOCK_SIZE = 256


def check_seed(seed):
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def stream_rng(seed, counter=0, stream=STREAM_SAMPLE):
    """Generator for the ``counter``-th draw of ``stream`` under ``seed``."""
    ss = np.random.SeedSequence([check_seed(seed), int(stream), int(counter)])
    return np.random.Generator(np.random.PCG64(ss))


def blocks(reps):
    """Yield ``(block_index, start, stop)`` covering ``range(reps)``."""
    for b, start in enumerate(range(0, reps, BLOCK_SIZE)):
        yield b, start, min(start + BLOCK_SIZE, reps)
