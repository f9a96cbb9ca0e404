"""Random dictionary functions used as projection directions at tree nodes.

Families:

* ``brownian``: standard Brownian motion started at 0, ``N(0, dt)`` increments.
* ``cosine``: ``cos(2 pi f t + phi)``, ``f ~ U[0, freq_max]``, ``phi ~ U[0, 2 pi)``.
* ``wavelet``: Mexican hat ``(1 - z^2) exp(-z^2 / 2)``, ``z = (t - u) / s``,
  ``u ~ U[0, 1]``, ``s ~ U[scale_range]``.
* ``self``: a curve drawn uniformly from the tree's training subsample.

Multivariate draws use one independent function per coordinate. The cosine
and wavelet parameter laws are tunable defaults, not prescribed values.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .path import FunctionalPath


class DictionaryKind(str, Enum):
    BROWNIAN = "brownian"
    COSINE = "cosine"
    WAVELET = "wavelet"
    SELF = "self"


@dataclass(frozen=True)
class DictionaryConfig:
    kind: DictionaryKind = DictionaryKind.BROWNIAN
    cosine_freq_max: float = 10.0
    wavelet_scale_range: tuple[float, float] = (0.05, 0.5)
    pool_size: int = 0  # 0 = fresh draw at every node

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DictionaryKind(self.kind))
        object.__setattr__(
            self, "wavelet_scale_range", tuple(float(s) for s in self.wavelet_scale_range)
        )
        lo, hi = self.wavelet_scale_range
        if not 0 < lo <= hi:
            raise ValueError(f"wavelet scale range must satisfy 0 < lo <= hi, got {(lo, hi)}")
        if self.cosine_freq_max < 0:
            raise ValueError("cosine frequency bound must be >= 0")
        if self.pool_size < 0:
            raise ValueError("pool size must be >= 0")


def _brownian(grid: np.ndarray, dim: int, rng: np.random.Generator) -> np.ndarray:
    dt = np.diff(grid)
    steps = rng.standard_normal((grid.size - 1, dim)) * np.sqrt(dt)[:, None]
    out = np.zeros((grid.size, dim))
    np.cumsum(steps, axis=0, out=out[1:])
    return out


def _cosine(grid: np.ndarray, dim: int, rng: np.random.Generator, freq_max: float) -> np.ndarray:
    freq = rng.uniform(0.0, freq_max, size=dim)
    phase = rng.uniform(0.0, 2 * np.pi, size=dim)
    return np.cos(2 * np.pi * grid[:, None] * freq[None, :] + phase[None, :])


def _mexican_hat(
    grid: np.ndarray, dim: int, rng: np.random.Generator, scale_range: tuple[float, float]
) -> np.ndarray:
    shift = rng.uniform(0.0, 1.0, size=dim)
    scale = rng.uniform(scale_range[0], scale_range[1], size=dim)
    z = (grid[:, None] - shift[None, :]) / scale[None, :]
    return (1.0 - z**2) * np.exp(-0.5 * z**2)


def draw_values(
    kind: DictionaryKind | str,
    grid: np.ndarray,
    dim: int,
    rng: np.random.Generator,
    config: DictionaryConfig | None = None,
    samples: np.ndarray | None = None,
) -> np.ndarray:
    """Draw one dictionary function on ``grid``; returns shape ``(p, dim)``."""
    kind = DictionaryKind(kind)
    config = config or DictionaryConfig(kind=kind)
    grid = np.asarray(grid, dtype=np.float64)
    if kind is DictionaryKind.BROWNIAN:
        return _brownian(grid, dim, rng)
    if kind is DictionaryKind.COSINE:
        return _cosine(grid, dim, rng, config.cosine_freq_max)
    if kind is DictionaryKind.WAVELET:
        return _mexican_hat(grid, dim, rng, config.wavelet_scale_range)
    if samples is None or len(samples) == 0:
        raise ValueError("the self dictionary needs training samples to draw from")
    return np.array(samples[rng.integers(len(samples))], dtype=np.float64)


def draw(
    kind: DictionaryKind | str,
    grid: np.ndarray,
    dim: int,
    rng: np.random.Generator,
    config: DictionaryConfig | None = None,
    samples: np.ndarray | None = None,
) -> FunctionalPath:
    return FunctionalPath(grid, draw_values(kind, grid, dim, rng, config, samples))


class DictionarySampler:
    """Draws node dictionaries, either fresh or from a fixed pool of ``pool_size`` functions."""

    def __init__(
        self,
        config: DictionaryConfig,
        grid: np.ndarray,
        dim: int,
        pool_rng: np.random.Generator | None = None,
    ) -> None:
        self.config = config
        self.grid = np.asarray(grid, dtype=np.float64)
        self.dim = dim
        self.pool: np.ndarray | None = None
        if config.pool_size > 0 and config.kind is not DictionaryKind.SELF:
            if pool_rng is None:
                raise ValueError("a pool rng is required when pool_size > 0")
            self.pool = np.stack(
                [
                    draw_values(config.kind, self.grid, dim, pool_rng, config)
                    for _ in range(config.pool_size)
                ]
            )

    def draw(self, rng: np.random.Generator, samples: np.ndarray | None = None) -> np.ndarray:
        if self.pool is not None:
            return self.pool[rng.integers(len(self.pool))]
        return draw_values(self.config.kind, self.grid, self.dim, rng, self.config, samples)
