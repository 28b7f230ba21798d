"""Deterministic per-component RNG derivation.

Every random stream in a run is derived from the scenario's root seed and a
fixed string label, so adding or reordering components never perturbs the
streams of the others, and two runs with the same config are bit-identical.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(root_seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{root_seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(root_seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root_seed, label))
