"""Reproducible random streams.

One 64-bit master seed identifies a whole experiment.  Independent streams
(one per realization, per sweep point, per retry) are derived through
``numpy.random.SeedSequence`` spawn keys, so ensemble members can be
evaluated in any order, or concurrently, without changing the draws.
"""

import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, key)``.

    The same ``(seed, key)`` always yields bit-identical draws; distinct
    keys yield statistically independent streams.
    """
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(seq)
