"""Seeded generators for the synthetic anomaly-detection scenarios.

Every generator returns a labelled :class:`FunctionalDataset` on a uniform
grid of ``p`` points in ``[0, 1]``. The first ``floor(n * (1 - fraction))``
samples are drawn from the normal law and the rest from the abnormal law;
the sample order is then shuffled with the same seeded stream.

Scenarios and their tunable parameters (defaults in :data:`DEFAULTS`):

``noise-interval``
    Constant curves ``b + eps(t) 1{t in I}``, ``b ~ U[b_range]``, ``eps ~ N(0, noise_sd^2)``;
    normal ``I = [0.3, 0.6]``, abnormal ``I = [0.7, 0.8]``.
``brownian-drift``
    Euler scheme ``X_{t+dt} = X_t + mu dt + sigma sqrt(dt) N(0, 1)``, ``X_0 = 0``.
``swap``
    ``30 t^q (1 - t)^q`` with ``q`` equispaced over the sample index, plus
    ``N(0, noise_sd^2)`` events on ``[0.2, 0.4]`` (normal) or ``[0.6, 0.8]`` (abnormal).
``robustness``
    Brownian paths with ``sigma = 0.05`` (normal) and ``0.05 + noise_level`` (second class).
``robustness-events``
    Swap-style curves; abnormal events ``N(0, 0.5^2)`` on ``[0.2, 0.5]`` and a
    further ``slight_fraction`` of normal curves with ``N(0, 0.1^2)`` on ``[0.7, 0.9]``.
``merton``
    Brownian diffusion plus compound-Poisson jumps with rate ``jump_rate`` and
    ``N(jump_mean, jump_sd^2)`` sizes.
``planar-brownian``
    Two-dimensional Brownian paths, ``sigma = 0.1`` (normal) vs ``0.4`` (abnormal).
``depth``
    Three-dimensional Brownian paths, ``mu = 0``, ``sigma = 0.1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .path import FunctionalDataset, uniform_grid
from .seeding import derive_rng


@dataclass(frozen=True)
class SynthSpec:
    scenario: str
    n: int = 100
    p: int = 100
    fraction_abnormal: float = 0.1
    seed: int = 0
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.scenario not in GENERATORS:
            raise ValueError(
                f"unknown scenario {self.scenario!r}; choose from {', '.join(sorted(GENERATORS))}"
            )
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        if not 0.0 <= self.fraction_abnormal < 1.0:
            raise ValueError(f"fraction_abnormal must lie in [0, 1), got {self.fraction_abnormal}")
        unknown = set(self.params) - set(DEFAULTS[self.scenario])
        if unknown:
            raise ValueError(f"unknown parameters for {self.scenario}: {sorted(unknown)}")
        for key, value in self.params.items():
            if key.endswith("interval"):
                lo, hi = value
                if not 0.0 <= lo < hi <= 1.0:
                    raise ValueError(f"{key} must be a sub-interval of [0, 1], got {value}")

    def param(self, key: str) -> Any:
        return self.params.get(key, DEFAULTS[self.scenario][key])


def class_counts(n: int, fraction_abnormal: float) -> tuple[int, int]:
    """``(n_normal, n_abnormal)`` with ``n_normal = floor(n * (1 - fraction))``."""
    # tolerance guards exact products such as 100 * 0.9 against rounding below
    n_normal = int(math.floor(n * (1.0 - fraction_abnormal) + 1e-9))
    return n_normal, n - n_normal


def _labels_and_order(spec: SynthSpec, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n_normal, n_abnormal = class_counts(spec.n, spec.fraction_abnormal)
    labels = np.r_[np.zeros(n_normal, dtype=np.int64), np.ones(n_abnormal, dtype=np.int64)]
    return labels, rng.permutation(spec.n)


def _finish(spec: SynthSpec, grid: np.ndarray, values: np.ndarray, labels: np.ndarray, order: np.ndarray) -> FunctionalDataset:
    return FunctionalDataset(
        grid,
        values[order],
        labels[order],
        meta={"scenario": spec.scenario, "seed": spec.seed},
    )


def _interval_mask(grid: np.ndarray, interval: tuple[float, float]) -> np.ndarray:
    lo, hi = interval
    return (grid >= lo) & (grid <= hi)


def brownian_paths(
    grid: np.ndarray,
    n: int,
    dim: int,
    mu: Any,
    sigma: Any,
    rng: np.random.Generator,
) -> np.ndarray:
    """Euler paths started at 0, shape ``(n, p, dim)``; ``mu``/``sigma`` may be per-coordinate."""
    dt = np.diff(grid)[None, :, None]
    mu = np.broadcast_to(np.asarray(mu, dtype=np.float64), (dim,))
    sigma = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (dim,))
    z = rng.standard_normal((n, grid.size - 1, dim))
    steps = mu * dt + sigma * np.sqrt(dt) * z
    out = np.zeros((n, grid.size, dim))
    np.cumsum(steps, axis=1, out=out[:, 1:, :])
    return out


def gen_noise_interval(spec: SynthSpec) -> FunctionalDataset:
    rng = derive_rng(spec.seed, "noise-interval")
    grid = uniform_grid(spec.p)
    labels, order = _labels_and_order(spec, rng)
    lo, hi = spec.param("b_range")
    b = rng.uniform(lo, hi, size=spec.n)
    eps = rng.standard_normal((spec.n, spec.p)) * spec.param("noise_sd")
    masks = np.where(
        labels[:, None] == 1,
        _interval_mask(grid, spec.param("abnormal_interval"))[None, :],
        _interval_mask(grid, spec.param("normal_interval"))[None, :],
    )
    values = b[:, None] + eps * masks
    return _finish(spec, grid, values[:, :, None], labels, order)


def gen_brownian_drift(spec: SynthSpec) -> FunctionalDataset:
    rng = derive_rng(spec.seed, "brownian-drift")
    grid = uniform_grid(spec.p)
    labels, order = _labels_and_order(spec, rng)
    n_normal = int((labels == 0).sum())
    normal = brownian_paths(grid, n_normal, 1, spec.param("mu_normal"), spec.param("sigma_normal"), rng)
    abnormal = brownian_paths(
        grid, spec.n - n_normal, 1, spec.param("mu_abnormal"), spec.param("sigma_abnormal"), rng
    )
    return _finish(spec, grid, np.concatenate([normal, abnormal]), labels, order)


def _bumps(grid: np.ndarray, n: int, amplitude: float, q_range: tuple[float, float]) -> np.ndarray:
    q = np.linspace(q_range[0], q_range[1], n)
    return amplitude * (grid[None, :] ** q[:, None]) * ((1.0 - grid[None, :]) ** q[:, None])


def gen_swap_events(spec: SynthSpec) -> FunctionalDataset:
    rng = derive_rng(spec.seed, "swap")
    grid = uniform_grid(spec.p)
    labels, order = _labels_and_order(spec, rng)
    base = _bumps(grid, spec.n, spec.param("amplitude"), spec.param("q_range"))
    # q follows the final sample order, so classes get q values at random
    base = base[np.argsort(order)]
    eps = rng.standard_normal((spec.n, spec.p)) * spec.param("noise_sd")
    masks = np.where(
        labels[:, None] == 1,
        _interval_mask(grid, spec.param("abnormal_interval"))[None, :],
        _interval_mask(grid, spec.param("normal_interval"))[None, :],
    )
    values = base + eps * masks
    return _finish(spec, grid, values[:, :, None], labels, order)


def gen_robustness_noise(spec: SynthSpec) -> FunctionalDataset:
    rng = derive_rng(spec.seed, "robustness")
    grid = uniform_grid(spec.p)
    labels, order = _labels_and_order(spec, rng)
    n_normal = int((labels == 0).sum())
    sigma = spec.param("sigma")
    first = brownian_paths(grid, n_normal, 1, 0.0, sigma, rng)
    second = brownian_paths(grid, spec.n - n_normal, 1, 0.0, sigma + spec.param("noise_level"), rng)
    return _finish(spec, grid, np.concatenate([first, second]), labels, order)


def gen_robustness_events(spec: SynthSpec) -> FunctionalDataset:
    rng = derive_rng(spec.seed, "robustness-events")
    grid = uniform_grid(spec.p)
    labels, order = _labels_and_order(spec, rng)
    n_normal = int((labels == 0).sum())
    n_slight = min(n_normal, int(math.floor(spec.n * spec.param("slight_fraction") + 1e-9)))
    base = _bumps(grid, spec.n, spec.param("amplitude"), spec.param("q_range"))[np.argsort(order)]
    eps = rng.standard_normal((spec.n, spec.p))
    sd = np.zeros(spec.n)
    mask = np.zeros((spec.n, spec.p), dtype=bool)
    # pre-shuffle layout: [clean normals | slightly noisy normals | anomalies]
    slight = slice(n_normal - n_slight, n_normal)
    sd[slight] = spec.param("slight_sd")
    mask[slight] = _interval_mask(grid, spec.param("slight_interval"))
    sd[n_normal:] = spec.param("abnormal_sd")
    mask[n_normal:] = _interval_mask(grid, spec.param("abnormal_interval"))
    values = base + eps * sd[:, None] * mask
    ds = _finish(spec, grid, values[:, :, None], labels, order)
    slight_flags = np.zeros(spec.n, dtype=bool)
    slight_flags[slight] = True
    ds.meta["slightly_noisy"] = slight_flags[order].tolist()
    return ds


def gen_merton(spec: SynthSpec) -> FunctionalDataset:
    rng = derive_rng(spec.seed, "merton")
    grid = uniform_grid(spec.p)
    labels, order = _labels_and_order(spec, rng)
    n_normal = int((labels == 0).sum())
    n_abnormal = spec.n - n_normal
    # diffusion first, jumps after: with jump_rate = 0 the paths match the
    # pure Brownian draw from the same stream
    normal = brownian_paths(grid, n_normal, 1, spec.param("mu"), spec.param("sigma"), rng)
    abnormal = brownian_paths(grid, n_abnormal, 1, spec.param("mu"), spec.param("sigma_abnormal"), rng)
    values = np.concatenate([normal, abnormal])
    dt = np.diff(grid)
    rates = np.where(labels == 1, spec.param("jump_rate_abnormal"), spec.param("jump_rate"))
    counts = rng.poisson(rates[:, None] * dt[None, :])
    sizes = rng.standard_normal(counts.shape)
    jump_sd = spec.param("jump_sd")
    # sum of c iid N(m, s^2) jumps is N(c m, c s^2)
    jumps = counts * spec.param("jump_mean") + np.sqrt(counts) * jump_sd * sizes
    values[:, 1:, 0] += np.cumsum(jumps, axis=1)
    return _finish(spec, grid, values, labels, order)


def gen_planar_brownian(spec: SynthSpec) -> FunctionalDataset:
    rng = derive_rng(spec.seed, "planar-brownian")
    grid = uniform_grid(spec.p)
    labels, order = _labels_and_order(spec, rng)
    n_normal = int((labels == 0).sum())
    normal = brownian_paths(grid, n_normal, 2, spec.param("mu"), spec.param("sigma_normal"), rng)
    abnormal = brownian_paths(
        grid, spec.n - n_normal, 2, spec.param("mu"), spec.param("sigma_abnormal"), rng
    )
    return _finish(spec, grid, np.concatenate([normal, abnormal]), labels, order)


def gen_depth_experiment(spec: SynthSpec) -> FunctionalDataset:
    rng = derive_rng(spec.seed, "depth")
    grid = uniform_grid(spec.p)
    labels, order = _labels_and_order(spec, rng)
    n_normal = int((labels == 0).sum())
    dim = spec.param("dim")
    normal = brownian_paths(grid, n_normal, dim, spec.param("mu"), spec.param("sigma"), rng)
    abnormal = brownian_paths(grid, spec.n - n_normal, dim, spec.param("mu"), spec.param("sigma_abnormal"), rng)
    return _finish(spec, grid, np.concatenate([normal, abnormal]), labels, order)


GENERATORS: dict[str, Callable[[SynthSpec], FunctionalDataset]] = {
    "noise-interval": gen_noise_interval,
    "brownian-drift": gen_brownian_drift,
    "swap": gen_swap_events,
    "robustness": gen_robustness_noise,
    "robustness-events": gen_robustness_events,
    "merton": gen_merton,
    "planar-brownian": gen_planar_brownian,
    "depth": gen_depth_experiment,
}

DEFAULTS: dict[str, dict[str, Any]] = {
    "noise-interval": {
        "b_range": (0.0, 100.0),
        "noise_sd": 1.0,
        "normal_interval": (0.3, 0.6),
        "abnormal_interval": (0.7, 0.8),
    },
    "brownian-drift": {
        "mu_normal": 0.0,
        "sigma_normal": 0.5,
        "mu_abnormal": 0.2,
        "sigma_abnormal": 0.4,
    },
    "swap": {
        "amplitude": 30.0,
        "q_range": (1.0, 1.4),
        "noise_sd": 0.8,
        "normal_interval": (0.2, 0.4),
        "abnormal_interval": (0.6, 0.8),
    },
    "robustness": {"sigma": 0.05, "noise_level": 0.0},
    "robustness-events": {
        "amplitude": 30.0,
        "q_range": (1.0, 1.4),
        "abnormal_sd": 0.5,
        "abnormal_interval": (0.2, 0.5),
        "slight_fraction": 0.1,
        "slight_sd": 0.1,
        "slight_interval": (0.7, 0.9),
    },
    "merton": {
        "mu": 0.0,
        "sigma": 0.1,
        "sigma_abnormal": 0.1,
        "jump_rate": 3.0,
        "jump_rate_abnormal": 3.0,
        "jump_mean": 0.0,
        "jump_sd": 0.1,
    },
    "planar-brownian": {"mu": 0.0, "sigma_normal": 0.1, "sigma_abnormal": 0.4},
    "depth": {"dim": 3, "mu": 0.0, "sigma": 0.1, "sigma_abnormal": 0.1},
}

# scenario-specific sample sizes and class fractions
SIZE_DEFAULTS: dict[str, dict[str, Any]] = {
    "robustness": {"n": 550, "fraction_abnormal": 50 / 550},
    "merton": {"fraction_abnormal": 0.0},
    "depth": {"fraction_abnormal": 0.0},
}


def make_spec(scenario: str, **overrides: Any) -> SynthSpec:
    """Spec with scenario defaults, e.g. ``make_spec("swap", seed=7)``."""
    if scenario not in GENERATORS:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {', '.join(sorted(GENERATORS))}")
    fields = {**SIZE_DEFAULTS.get(scenario, {}), **{k: v for k, v in overrides.items() if v is not None}}
    return SynthSpec(scenario=scenario, **fields)


def generate(spec: SynthSpec) -> FunctionalDataset:
    return GENERATORS[spec.scenario](spec)
