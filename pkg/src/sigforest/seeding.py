"""Deterministic random streams derived from one master seed."""

from __future__ import annotations

import zlib

import numpy as np


def derive_seed(seed: int, role: str, index: int = 0) -> np.random.SeedSequence:
    """Stable ``SeedSequence`` for ``(seed, role, index)``; independent of call order."""
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    tag = zlib.crc32(role.encode("utf-8"))
    return np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, tag, index])


def derive_rng(seed: int, role: str, index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, role, index)))
