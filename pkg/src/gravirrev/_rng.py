"""Seeded substreams.

Every trajectory gets its own counter-based Philox stream keyed by
``(seed, index)`` so ensembles do not depend on evaluation order.
"""
import numpy as np


def substream(seed: int, index: int = 0) -> np.random.Generator:
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative integers")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))
