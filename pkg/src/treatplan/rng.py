"""Named, independent random substreams derived from one master seed.

Every stochastic component (population draw, per-patient world dynamics,
missing-observation masks, probabilistic-policy coins) pulls from its own
substream, so toggling one source never perturbs the draws of another and a
single 64-bit seed reproduces an entire experiment.
"""
from __future__ import annotations

import numpy as np

# Fixed stream ids; changing them changes every seeded result.
_STREAM_IDS = {
    "population": 1,
    "world": 2,
    "obs": 3,
    "policy": 4,
}


def substream(seed: int, name: str, *indices: int) -> np.random.Generator:
    """Generator for the (name, *indices) substream of ``seed``."""
    return np.random.Generator(np.random.PCG64(substream_seed(seed, name, *indices)))


def substream_seed(seed: int, name: str, *indices: int) -> np.random.SeedSequence:
    if name not in _STREAM_IDS:
        raise KeyError(f"unknown stream name {name!r}")
    return np.random.SeedSequence((int(seed), _STREAM_IDS[name], *map(int, indices)))
