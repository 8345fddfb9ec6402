"""Independent random streams derived from one experiment seed."""

import numpy as np

STREAMS = {
    "layout": 0,
    "split": 1,
    "folds": 2,
    "trials": 3,
    "synthetic": 4,
}


def derive_rng(seed: int, stream: str, *extra: int) -> np.random.Generator:
    """Return a generator for ``stream`` that is independent of every other stream.

    ``extra`` integers extend the spawn key, e.g. a trial index.
    """
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    key = (STREAMS[stream], *extra)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=key))
