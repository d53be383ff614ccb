"""
Seed substreams and run fingerprints
"""

import hashlib
import json
from typing import Any, Dict

import numpy as np

# Substream keys; each sampler derives its own generator from the master seed
STREAM_INITIAL_DESIGN = 0
STREAM_POOL = 1
STREAM_BOOTSTRAP = 2
STREAM_KMEANS = 3
STREAM_POOL_GROWTH = 4


def fingerprint(settings: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a run's settings"""
    canonical = json.dumps(settings, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def substream(seed: int, *key: int) -> np.random.Generator:
    """
    Independent deterministic generator for one purpose of one run.

    The master seed plus a spawn key (stream id, then e.g. iteration number)
    fully determines the stream; identical seed gives bit-identical draws.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


def draw_seed(rng: np.random.Generator) -> int:
    """Integer seed for libraries that take one (k-means restarts)"""
    return int(rng.integers(0, 2**31 - 1))
