"""Truncated path signatures of piecewise-linear paths.

Signatures are stored densely as flat float64 vectors ordered by level and,
within a level, lexicographically by word, with the constant 1 at position 0.
Words are tuples of 1-based coordinate indices, so for ``d = 2`` and ``k = 2``
the layout is::

    (), (1,), (2,), (1, 1), (1, 2), (2, 1), (2, 2)

A linear segment with increment ``delta`` has signature ``exp(delta)`` in the
truncated tensor algebra (level ``l`` is ``delta^{(x)l} / l!``) and signatures
of concatenated segments multiply, so the signature of a whole path is a left
fold of tensor products over its segments.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .path import FunctionalPath

Word = tuple[int, ...]


class SignatureError(ValueError):
    pass


def signature_length(dim: int, depth: int) -> int:
    """Number of stored coefficients, the constant 1 included."""
    if dim < 1 or depth < 0:
        raise SignatureError(f"invalid (dim, depth) = ({dim}, {depth})")
    return sum(dim**j for j in range(depth + 1))


def level_offsets(dim: int, depth: int) -> list[int]:
    """Start index of each level 0..depth, followed by the total length."""
    offsets = [0]
    for j in range(depth + 1):
        offsets.append(offsets[-1] + dim**j)
    return offsets


def words(dim: int, depth: int) -> Iterator[Word]:
    """Non-empty words of length 1..depth in storage order."""
    for level in range(1, depth + 1):
        yield from itertools.product(range(1, dim + 1), repeat=level)


def check_word(word: Sequence[int], dim: int) -> Word:
    word = tuple(int(i) for i in word)
    if not word:
        raise SignatureError("word must be non-empty")
    if any(i < 1 or i > dim for i in word):
        raise SignatureError(f"word {word} has an index outside [1, {dim}]")
    return word


def word_index(word: Sequence[int], dim: int) -> int:
    """Flat position of ``word`` in a signature vector of dimension ``dim``."""
    word = check_word(word, dim)
    pos = 0
    for i in word:
        pos = pos * dim + (i - 1)
    return level_offsets(dim, len(word))[len(word)] + pos


@dataclass(frozen=True, eq=False)
class SignatureVector:
    dim: int
    depth: int
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coefficients, dtype=np.float64)
        expected = signature_length(self.dim, self.depth)
        if coeffs.shape != (expected,):
            raise SignatureError(
                f"dim={self.dim}, depth={self.depth} needs {expected} coefficients, got {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    def __len__(self) -> int:
        return self.coefficients.size

    def __getitem__(self, word: Sequence[int]) -> float:
        word = tuple(word)
        if not word:
            return float(self.coefficients[0])
        if len(word) > self.depth:
            raise SignatureError(f"word of length {len(word)} exceeds depth {self.depth}")
        return float(self.coefficients[word_index(word, self.dim)])

    def level(self, j: int) -> np.ndarray:
        off = level_offsets(self.dim, self.depth)
        return self.coefficients[off[j] : off[j + 1]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignatureVector):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.depth == other.depth
            and np.array_equal(self.coefficients, other.coefficients)
        )

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def trivial(cls, dim: int, depth: int) -> SignatureVector:
        c = np.zeros(signature_length(dim, depth))
        c[0] = 1.0
        return cls(dim, depth, c)


# ---------------------------------------------------------------------------
# batched kernels: leading axes are sample axes, last axis holds coefficients


def _split_levels(flat: np.ndarray, dim: int, depth: int) -> list[np.ndarray]:
    off = level_offsets(dim, depth)
    return [flat[..., off[j] : off[j + 1]] for j in range(depth + 1)]


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a[..., :, None] * b[..., None, :]).reshape(*a.shape[:-1], a.shape[-1] * b.shape[-1])


def tensor_product(a: np.ndarray, b: np.ndarray, dim: int, depth: int) -> np.ndarray:
    """Truncated tensor product of batched flat signatures (broadcasts on leading axes)."""
    la = _split_levels(a, dim, depth)
    lb = _split_levels(b, dim, depth)
    out = []
    for level in range(depth + 1):
        acc = _outer(la[0], lb[level])
        for i in range(1, level + 1):
            acc = acc + _outer(la[i], lb[level - i])
        out.append(acc)
    return np.concatenate(out, axis=-1)


def exp_increment(delta: np.ndarray, depth: int) -> np.ndarray:
    """Signature of linear segments with increments ``delta`` of shape ``(..., d)``."""
    delta = np.asarray(delta, dtype=np.float64)
    levels = [np.ones(delta.shape[:-1] + (1,))]
    for j in range(1, depth + 1):
        levels.append(_outer(levels[-1], delta) / j)
    return np.concatenate(levels, axis=-1)


def _mul_exp(levels: list[np.ndarray], delta: np.ndarray, depth: int) -> list[np.ndarray]:
    # S (x) exp(delta), level L by Horner:
    # ((S_0 d/L + S_1) d/(L-1) + ... + S_{L-1}) d/1 + S_L
    out = [levels[0]]
    for level in range(1, depth + 1):
        acc = levels[0]
        for i in range(level):
            acc = _outer(acc, delta) / (level - i)
            acc = acc + levels[i + 1]
        out.append(acc)
    return out


def batch_signature(increments: np.ndarray, depth: int) -> np.ndarray:
    """Signatures of a batch of piecewise-linear paths.

    Args:
        increments: shape ``(n, s, d)``, the ``s`` segment increments of each path.
        depth: truncation level ``k >= 1``.

    Returns:
        Array of shape ``(n, signature_length(d, k))``.
    """
    increments = np.asarray(increments, dtype=np.float64)
    if increments.ndim != 3:
        raise SignatureError(f"increments must have shape (n, s, d), got {increments.shape}")
    if depth < 1:
        raise SignatureError(f"depth must be >= 1, got {depth}")
    n, _, dim = increments.shape
    if dim == 1:
        # one-dimensional tensors commute, so the product of exponentials collapses
        return exp_increment(increments.sum(axis=1), depth)
    levels = [np.ones((n, 1))] + [np.zeros((n, dim**j)) for j in range(1, depth + 1)]
    for s in range(increments.shape[1]):
        levels = _mul_exp(levels, increments[:, s, :], depth)
    return np.concatenate(levels, axis=-1)


def path_signatures(values: np.ndarray, depth: int) -> np.ndarray:
    """Signatures of sampled paths given by their values, shape ``(n, L, d)``.

    One-dimensional paths use the exact total increment ``end - start`` rather
    than a sum of increments, so curves that return to their start value get
    an exactly trivial signature.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape[2] == 1:
        return exp_increment(values[:, -1, :] - values[:, 0, :], depth)
    return batch_signature(np.diff(values, axis=1), depth)


def batch_fold_signature(increments: np.ndarray, depth: int) -> np.ndarray:
    """Same as :func:`batch_signature` but always folds segment by segment."""
    increments = np.asarray(increments, dtype=np.float64)
    n, _, dim = increments.shape
    levels = [np.ones((n, 1))] + [np.zeros((n, dim**j)) for j in range(1, depth + 1)]
    for s in range(increments.shape[1]):
        levels = _mul_exp(levels, increments[:, s, :], depth)
    return np.concatenate(levels, axis=-1)


def batch_word_signature(increments: np.ndarray, word: Sequence[int]) -> np.ndarray:
    """One coordinate signature for a batch of paths, shape ``(n,)``.

    Tracks only the prefixes of ``word`` through the segment fold, so the cost
    is ``O(len(word)^2)`` per segment regardless of ``d``.
    """
    increments = np.asarray(increments, dtype=np.float64)
    word = check_word(word, increments.shape[2])
    ell = len(word)
    n = increments.shape[0]
    prefix = [np.ones(n)] + [np.zeros(n) for _ in range(ell)]
    cols = [w - 1 for w in word]
    for s in range(increments.shape[1]):
        delta = increments[:, s, :]
        new = [prefix[0]]
        for j in range(1, ell + 1):
            acc = prefix[j].copy()
            # term i: prefix_i * prod_{r=i}^{j-1} delta[w_r] / (j - i)!
            prod = np.ones(n)
            for i in range(j - 1, -1, -1):
                prod = prod * delta[:, cols[i]]
                acc = acc + prefix[i] * prod / math.factorial(j - i)
            new.append(acc)
        prefix = new
    return prefix[ell]


# ---------------------------------------------------------------------------
# single-path API


def segment_signature(
    start_value: Sequence[float], end_value: Sequence[float], dt: float, depth: int
) -> SignatureVector:
    """Closed-form signature of the linear segment from ``start_value`` to ``end_value``.

    The slope is ``(end - start) / dt``; since coefficients depend on
    ``slope * dt`` only, ``dt`` matters just through its sign check.
    """
    if not dt > 0:
        raise SignatureError(f"segment duration must be > 0, got {dt}")
    if depth < 1:
        raise SignatureError(f"depth must be >= 1, got {depth}")
    start = np.atleast_1d(np.asarray(start_value, dtype=np.float64))
    end = np.atleast_1d(np.asarray(end_value, dtype=np.float64))
    if start.shape != end.shape or start.ndim != 1:
        raise SignatureError("start and end values must be vectors of equal length")
    slope = (end - start) / dt
    return SignatureVector(start.size, depth, exp_increment(slope * dt, depth))


def chen_concat(a: SignatureVector, b: SignatureVector) -> SignatureVector:
    """Signature of the concatenation of two paths from their signatures."""
    if a.dim != b.dim or a.depth != b.depth:
        raise SignatureError(
            f"cannot concatenate signatures of (dim, depth) {(a.dim, a.depth)} and {(b.dim, b.depth)}"
        )
    return SignatureVector(
        a.dim, a.depth, tensor_product(a.coefficients, b.coefficients, a.dim, a.depth)
    )


def truncated_signature(path: FunctionalPath, depth: int) -> SignatureVector:
    coeffs = path_signatures(path.values[None], depth)[0]
    return SignatureVector(path.dim, depth, coeffs)


def coordinate_signature(path: FunctionalPath, word: Sequence[int]) -> float:
    return float(batch_word_signature(path.increments[None], word)[0])


def signature_kernel(x: FunctionalPath, y: FunctionalPath, depth: int) -> float:
    """Truncated signature kernel ``<S^k(x), S^k(y)>``, constant term included."""
    if x.dim != y.dim:
        raise SignatureError(f"dimension mismatch: {x.dim} vs {y.dim}")
    sx = path_signatures(x.values[None], depth)[0]
    sy = path_signatures(y.values[None], depth)[0]
    return float(sx @ sy)


def segmentwise_kernel(x: FunctionalPath, y: FunctionalPath, depth: int) -> float:
    """Kernel accumulated over one window per grid segment.

    Returns ``1 + sum_seg (K^k(x_seg, y_seg) - 1)``. At ``depth = 1`` this is
    ``1 + sum_seg dx_seg . dy_seg``, the Riemann form of the derivative inner
    product scaled by the grid step.
    """
    if x.dim != y.dim or x.n_points != y.n_points:
        raise SignatureError("paths must share dimension and grid size")
    sx = exp_increment(x.increments, depth)
    sy = exp_increment(y.increments, depth)
    per_segment = np.einsum("sc,sc->s", sx[:, 1:], sy[:, 1:])
    return float(1.0 + per_segment.sum())
