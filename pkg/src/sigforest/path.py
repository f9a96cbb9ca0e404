"""Discretized curves viewed as piecewise-linear paths.

A :class:`FunctionalPath` is a single curve observed on a strictly increasing
time grid in ``[0, 1]``. A :class:`FunctionalDataset` stacks ``n`` curves that
share one grid, which is what lets split windows be index-aligned across all
samples of a tree node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


class PathError(ValueError):
    """Raised for malformed grids, values or windows."""


def _check_grid(times: np.ndarray) -> None:
    if times.ndim != 1:
        raise PathError(f"time grid must be 1-D, got shape {times.shape}")
    if times.size < 2:
        raise PathError(f"need at least 2 grid points, got {times.size}")
    if not np.all(np.isfinite(times)):
        raise PathError("time grid contains NaN or Inf")
    if np.any(np.diff(times) <= 0):
        raise PathError("time grid must be strictly increasing")
    if times[0] < 0 or times[-1] > 1:
        raise PathError(f"time grid must lie in [0, 1], got [{times[0]}, {times[-1]}]")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FunctionalPath:
    """One curve: ``times`` of shape ``(p,)`` and ``values`` of shape ``(p, d)``."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        times = _frozen(self.times)
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        values = _frozen(values)
        _check_grid(times)
        if values.ndim != 2 or values.shape[0] != times.size:
            raise PathError(
                f"values must have shape (p, d) with p={times.size}, got {values.shape}"
            )
        if values.shape[1] < 1:
            raise PathError("path dimension must be >= 1")
        if not np.all(np.isfinite(values)):
            raise PathError("values contain NaN or Inf")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def n_points(self) -> int:
        return self.times.size

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FunctionalPath):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.values, other.values
        )

    def __hash__(self) -> int:
        return hash((self.times.tobytes(), self.values.tobytes()))


@dataclass(frozen=True)
class Window:
    """A run of ``length`` consecutive grid points starting at ``start_index``."""

    start_index: int
    length: int

    def __post_init__(self) -> None:
        if self.start_index < 0:
            raise PathError(f"window start must be >= 0, got {self.start_index}")
        if self.length < 2:
            raise PathError(f"window needs at least 2 points, got {self.length}")

    @property
    def stop(self) -> int:
        return self.start_index + self.length

    def check_fits(self, n_points: int) -> None:
        if self.stop > n_points:
            raise PathError(
                f"window [{self.start_index}, {self.stop}) overruns a grid of {n_points} points"
            )

    @classmethod
    def full(cls, n_points: int) -> Window:
        return cls(0, n_points)


def window_length(n_points: int, n_windows: int) -> int:
    """Grid points per split window: ``floor(p / n_windows)``, at least 2."""
    if n_windows < 1:
        raise PathError(f"number of windows must be >= 1, got {n_windows}")
    return min(n_points, max(2, n_points // n_windows))


def from_observations(times: Sequence[float], values: Any) -> FunctionalPath:
    """Build a path from raw observations; 1-D ``values`` are treated as ``d=1``."""
    return FunctionalPath(np.asarray(times, dtype=np.float64), np.asarray(values, dtype=np.float64))


def restrict(path: FunctionalPath, window: Window) -> FunctionalPath:
    """Sub-path over the window's grid points, keeping the original times."""
    window.check_fits(path.n_points)
    sl = slice(window.start_index, window.stop)
    return FunctionalPath(path.times[sl], path.values[sl])


def time_augment(path: FunctionalPath) -> FunctionalPath:
    """Prepend the time grid as coordinate 1, giving a ``(d+1)``-dimensional path."""
    return FunctionalPath(path.times, np.column_stack([path.times, path.values]))


def uniform_grid(n_points: int) -> np.ndarray:
    if n_points < 2:
        raise PathError(f"need at least 2 grid points, got {n_points}")
    return np.linspace(0.0, 1.0, n_points)


@dataclass(frozen=True, eq=False)
class FunctionalDataset:
    """``n`` curves on a shared grid.

    ``values`` has shape ``(n, p, d)``. ``labels`` (optional) uses 1 for
    anomalies and 0 for normal samples. ``ids`` defaults to ``0..n-1``.
    """

    grid: np.ndarray
    values: np.ndarray
    labels: np.ndarray | None = None
    ids: tuple[str, ...] | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        grid = _frozen(self.grid)
        _check_grid(grid)
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 2:
            values = values[:, :, None]
        if values.ndim != 3 or values.shape[1] != grid.size:
            raise PathError(
                f"samples must have shape (n, p, d) with p={grid.size}, got {values.shape}"
            )
        if values.shape[0] < 1:
            raise PathError("dataset must hold at least one sample")
        if values.shape[2] < 1:
            raise PathError("path dimension must be >= 1")
        if not np.all(np.isfinite(values)):
            raise PathError("sample values contain NaN or Inf")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", _frozen(values))
        n = values.shape[0]
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (n,):
                raise PathError(f"expected {n} labels, got shape {labels.shape}")
            if not np.all(np.isin(labels, (0, 1))):
                raise PathError("labels must be 0 (normal) or 1 (anomaly)")
            labels = labels.astype(np.int64)
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)
        ids = tuple(str(i) for i in range(n)) if self.ids is None else tuple(map(str, self.ids))
        if len(ids) != n:
            raise PathError(f"expected {n} ids, got {len(ids)}")
        object.__setattr__(self, "ids", ids)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_points(self) -> int:
        return self.grid.size

    @property
    def dim(self) -> int:
        return self.values.shape[2]

    def __len__(self) -> int:
        return self.n_samples

    def path(self, i: int) -> FunctionalPath:
        return FunctionalPath(self.grid, self.values[i])

    def __iter__(self):
        for i in range(self.n_samples):
            yield self.path(i)

    def subset(self, index: Sequence[int] | np.ndarray) -> FunctionalDataset:
        index = np.asarray(index, dtype=np.int64)
        return FunctionalDataset(
            self.grid,
            self.values[index],
            None if self.labels is None else self.labels[index],
            tuple(self.ids[i] for i in index),
            dict(self.meta),
        )

    def time_augmented(self) -> FunctionalDataset:
        n, p, _ = self.values.shape
        t = np.broadcast_to(self.grid[None, :, None], (n, p, 1))
        return FunctionalDataset(
            self.grid, np.concatenate([t, self.values], axis=2), self.labels, self.ids, dict(self.meta)
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FunctionalDataset):
            return NotImplemented
        same_labels = (self.labels is None and other.labels is None) or (
            self.labels is not None
            and other.labels is not None
            and np.array_equal(self.labels, other.labels)
        )
        return (
            np.array_equal(self.grid, other.grid)
            and self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values)
            and same_labels
            and self.ids == other.ids
        )

    __hash__ = None  # type: ignore[assignment]


def dataset_from_paths(
    paths: Sequence[FunctionalPath], labels: Sequence[int] | None = None
) -> FunctionalDataset:
    if not paths:
        raise PathError("dataset must hold at least one sample")
    grid = paths[0].times
    for p in paths[1:]:
        if not np.array_equal(p.times, grid) or p.dim != paths[0].dim:
            raise PathError("all samples must share one grid and dimension")
    return FunctionalDataset(grid, np.stack([p.values for p in paths]), labels)
