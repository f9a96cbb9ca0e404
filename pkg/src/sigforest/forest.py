"""Isolation forests over functional data with pluggable split criteria.

Criteria:

* ``sif``: threshold one coordinate signature of the curve on a random window.
* ``ksif``: threshold the truncated signature kernel between the curve and a
  random dictionary function, both restricted to a random window.
* ``fif``: threshold the normalised ``L2`` / derivative inner product with a
  dictionary function on the full grid (Functional Isolation Forest).
* ``if``: threshold the raw value at one grid point and coordinate.

Every node draws its window, then its payload (word, dictionary function or
grid point), then the threshold, all from the tree's own random stream, so a
fitted forest is a pure function of ``(dataset, config)`` and does not depend
on how many threads built it.
"""

from __future__ import annotations

import logging
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Union

import numpy as np

from .dictionary import DictionaryConfig, DictionaryKind, DictionarySampler
from .metrics import ScoreReport
from .path import FunctionalDataset, FunctionalPath, PathError, Window, window_length
from .seeding import derive_rng
from .sigcore import check_word, path_signatures, signature_length, word_index, words

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.5772156649
FORMAT_VERSION = 1
THREADS_ENV = "SIGFOREST_THREADS"


class Criterion(str, Enum):
    SIF = "sif"
    KSIF = "ksif"
    FIF = "fif"
    IF = "if"


def avg_unsuccessful_bst_path(m: int) -> float:
    """Average unsuccessful-search path length ``c(m)`` in a BST of ``m`` keys."""
    if m <= 1:
        return 0.0
    if m == 2:
        return 1.0
    harmonic = math.log(m - 1) + EULER_GAMMA
    return 2.0 * harmonic - 2.0 * (m - 1) / m


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    subsample: int | None = None  # None: min(256, n)
    height_limit: int | None = None  # None: ceil(log2(subsample))
    depth: int = 3
    windows: int = 10
    criterion: Criterion = Criterion.SIF
    dictionary: DictionaryConfig = field(default_factory=DictionaryConfig)
    alpha: float = 1.0
    seed: int = 0
    time_augment: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "criterion", Criterion(self.criterion))
        if isinstance(self.dictionary, dict):
            object.__setattr__(self, "dictionary", DictionaryConfig(**self.dictionary))
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.subsample is not None and self.subsample < 2:
            raise ValueError(f"subsample must be >= 2, got {self.subsample}")
        if self.height_limit is not None and self.height_limit < 1:
            raise ValueError(f"height_limit must be >= 1, got {self.height_limit}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.windows < 1:
            raise ValueError(f"windows must be >= 1, got {self.windows}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def resolved(self, n_samples: int) -> ForestConfig:
        m = min(self.subsample if self.subsample is not None else 256, n_samples)
        height = self.height_limit or max(1, math.ceil(math.log2(m)))
        return replace(self, subsample=m, height_limit=height)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["criterion"] = self.criterion.value
        d["dictionary"]["kind"] = self.dictionary.kind.value
        d["dictionary"]["wavelet_scale_range"] = list(self.dictionary.wavelet_scale_range)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ForestConfig:
        d = dict(d)
        d["dictionary"] = DictionaryConfig(**d.get("dictionary", {}))
        return cls(**d)


@dataclass(eq=False)
class SplitRule:
    """A node split: project, then send ``<= threshold`` left and ``> threshold`` right.

    ``dictionary`` holds the dictionary function on the rule's window (ksif)
    or on the full grid (fif); ``point`` is ``(grid index, coordinate)`` for
    the ``if`` criterion. Coordinates in ``word`` are 1-based.
    """

    criterion: Criterion
    window: Window
    threshold: float
    word: tuple[int, ...] | None = None
    dictionary: np.ndarray | None = None
    point: tuple[int, int] | None = None
    alpha: float = 1.0
    _features: Any = field(default=None, repr=False)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "criterion": self.criterion.value,
            "window": [self.window.start_index, self.window.length],
            "threshold": float(self.threshold),
        }
        if self.word is not None:
            d["word"] = list(self.word)
        if self.dictionary is not None:
            d["dictionary"] = self.dictionary.tolist()
        if self.point is not None:
            d["point"] = list(self.point)
        if self.criterion is Criterion.FIF:
            d["alpha"] = float(self.alpha)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SplitRule:
        return cls(
            criterion=Criterion(d["criterion"]),
            window=Window(*d["window"]),
            threshold=float(d["threshold"]),
            word=tuple(d["word"]) if "word" in d else None,
            dictionary=np.array(d["dictionary"], dtype=np.float64) if "dictionary" in d else None,
            point=tuple(d["point"]) if "point" in d else None,
            alpha=float(d.get("alpha", 1.0)),
        )


@dataclass(eq=False)
class Leaf:
    size: int
    depth: int


@dataclass(eq=False)
class Internal:
    rule: SplitRule
    left: "TreeNode"
    right: "TreeNode"
    depth: int


TreeNode = Union[Leaf, Internal]


def _node_to_dict(node: TreeNode) -> dict[str, Any]:
    if isinstance(node, Leaf):
        return {"leaf": [node.size, node.depth]}
    return {
        "rule": node.rule.to_dict(),
        "depth": node.depth,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(d: dict[str, Any]) -> TreeNode:
    if "leaf" in d:
        return Leaf(*d["leaf"])
    return Internal(
        SplitRule.from_dict(d["rule"]), _node_from_dict(d["left"]), _node_from_dict(d["right"]), d["depth"]
    )


def iter_leaves(node: TreeNode):
    if isinstance(node, Leaf):
        yield node
    else:
        yield from iter_leaves(node.left)
        yield from iter_leaves(node.right)


def iter_internal(node: TreeNode):
    if isinstance(node, Internal):
        yield node
        yield from iter_internal(node.left)
        yield from iter_internal(node.right)


# ---------------------------------------------------------------------------
# projections


def _riemann_weights(grid: np.ndarray) -> np.ndarray:
    return np.diff(grid)


def _normalized(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Scale each coordinate curve to unit Riemann L2 norm; zero-norm curves stay 0.

    ``values`` has shape ``(..., p - 1, d)``, one row per left Riemann node.
    """
    w = weights[:, None]
    norms = np.sqrt(np.sum(w * values**2, axis=-2, keepdims=True))
    safe = np.where(norms > 0, norms, 1.0)
    return np.where(norms > 0, values / safe, 0.0)


def fif_features(values: np.ndarray, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit-normalised values and finite-difference derivatives, shape ``(..., p-1, d)``."""
    w = _riemann_weights(grid)
    level = _normalized(values[..., :-1, :], w)
    deriv = np.diff(values, axis=-2) / w[:, None]
    slope = _normalized(deriv, w)
    return level, slope


def riemann_inner(x: np.ndarray, y: np.ndarray, grid: np.ndarray) -> float:
    """Left Riemann sum of ``x * y`` summed over coordinates; inputs of shape ``(p, d)``."""
    w = _riemann_weights(grid)
    return float(np.sum(w[:, None] * np.asarray(x)[:-1] * np.asarray(y)[:-1]))


def derivative_inner(x: np.ndarray, y: np.ndarray, grid: np.ndarray) -> float:
    """Riemann inner product of finite-difference derivatives."""
    w = _riemann_weights(grid)
    dx = np.diff(x, axis=0) / w[:, None]
    dy = np.diff(y, axis=0) / w[:, None]
    return float(np.sum(w[:, None] * dx * dy))


def fif_projection(x: np.ndarray, d: np.ndarray, grid: np.ndarray, alpha: float) -> float:
    """FIF inner product of one curve with one dictionary function, shape ``(p, d)`` each."""
    xl, xs = fif_features(np.asarray(x, dtype=np.float64), grid)
    dl, ds = fif_features(np.asarray(d, dtype=np.float64), grid)
    w = _riemann_weights(grid)[:, None]
    return float(alpha * np.sum(w * xl * dl) + (1 - alpha) * np.sum(w * xs * ds))


class Projector:
    """Projects the samples of one dataset under split rules.

    Window signatures of all samples are computed once per window and shared
    by every node (and tree) that draws the same window.
    """

    def __init__(self, values: np.ndarray, grid: np.ndarray, depth: int, criterion: Criterion) -> None:
        self.values = values
        self.grid = grid
        self.depth = depth
        self.criterion = criterion
        self._sigs: dict[tuple[int, int], np.ndarray] = {}
        self._lock = threading.Lock()
        self._fif: tuple[np.ndarray, np.ndarray] | None = None
        if criterion is Criterion.FIF:
            self._fif = fif_features(values, grid)

    def window_signatures(self, window: Window) -> np.ndarray:
        key = (window.start_index, window.length)
        sig = self._sigs.get(key)
        if sig is None:
            seg = self.values[:, window.start_index : window.stop, :]
            sig = path_signatures(seg, self.depth)
            with self._lock:
                sig = self._sigs.setdefault(key, sig)
        return sig

    def rule_features(self, rule: SplitRule) -> Any:
        if rule._features is None:
            if rule.criterion is Criterion.SIF:
                rule._features = word_index(rule.word, self.values.shape[2])
            elif rule.criterion is Criterion.KSIF:
                rule._features = path_signatures(rule.dictionary[None], self.depth)[0]
            elif rule.criterion is Criterion.FIF:
                w = _riemann_weights(self.grid)[:, None]
                level, slope = fif_features(rule.dictionary, self.grid)
                rule._features = (w * level, w * slope)
            else:
                rule._features = rule.point
        return rule._features

    def project(self, rule: SplitRule, idx: np.ndarray) -> np.ndarray:
        feats = self.rule_features(rule)
        if rule.criterion is Criterion.SIF:
            return self.window_signatures(rule.window)[idx, feats]
        if rule.criterion is Criterion.KSIF:
            return self.window_signatures(rule.window)[idx] @ feats
        if rule.criterion is Criterion.FIF:
            level, slope = self._fif
            wl, ws = feats
            a = np.einsum("npd,pd->n", level[idx], wl)
            b = np.einsum("npd,pd->n", slope[idx], ws)
            return rule.alpha * a + (1.0 - rule.alpha) * b
        t, c = feats
        return self.values[idx, t, c]


def _prepare_values(values: np.ndarray, grid: np.ndarray, config: ForestConfig) -> np.ndarray:
    if config.time_augment and config.criterion in (Criterion.SIF, Criterion.KSIF):
        n, p, _ = values.shape
        t = np.broadcast_to(grid[None, :, None], (n, p, 1))
        return np.concatenate([t, values], axis=2)
    return values


def _augment_dictionary(values: np.ndarray, grid: np.ndarray, config: ForestConfig) -> np.ndarray:
    if config.time_augment and config.criterion is Criterion.KSIF:
        return np.column_stack([grid, values])
    return values


# ---------------------------------------------------------------------------
# tree construction


class _TreeBuilder:
    def __init__(
        self,
        projector: Projector,
        config: ForestConfig,
        sampler: DictionarySampler | None,
        raw_values: np.ndarray,
        rng: np.random.Generator,
        check_splits: bool = False,
    ) -> None:
        self.projector = projector
        self.config = config
        self.sampler = sampler
        self.raw_values = raw_values
        self.rng = rng
        self.check_splits = check_splits
        _, self.p, self.dim = projector.values.shape
        self.n_words = signature_length(self.dim, config.depth) - 1
        self.win_len = window_length(self.p, config.windows)
        self.subsample_values: np.ndarray | None = None

    def _draw_rule(self) -> SplitRule:
        rng = self.rng
        cfg = self.config
        crit = cfg.criterion
        if crit in (Criterion.SIF, Criterion.KSIF):
            start = int(rng.integers(0, self.p - self.win_len + 1))
            window = Window(start, self.win_len)
        else:
            window = Window.full(self.p)
        if crit is Criterion.SIF:
            # flat layout puts word number r (0-based, level-major) at index r + 1
            r = int(rng.integers(self.n_words))
            word = _word_at(self.dim, cfg.depth, r)
            return SplitRule(crit, window, np.nan, word=word)
        if crit is Criterion.KSIF:
            d = self.sampler.draw(rng, self.subsample_values)
            d = _augment_dictionary(d, self.projector.grid, cfg)
            return SplitRule(crit, window, np.nan, dictionary=np.ascontiguousarray(d[window.start_index : window.stop]))
        if crit is Criterion.FIF:
            d = self.sampler.draw(rng, self.subsample_values)
            return SplitRule(crit, window, np.nan, dictionary=np.array(d, dtype=np.float64), alpha=cfg.alpha)
        t = int(rng.integers(self.p))
        c = int(rng.integers(self.dim))
        return SplitRule(crit, window, np.nan, point=(t, c))

    def grow(self, idx: np.ndarray, depth: int) -> TreeNode:
        if idx.size <= 1 or depth >= self.config.height_limit:
            return Leaf(int(idx.size), depth)
        rule = self._draw_rule()
        proj = self.projector.project(rule, idx)
        lo, hi = float(proj.min()), float(proj.max())
        if not lo < hi:
            return Leaf(int(idx.size), depth)
        gamma = lo + (hi - lo) * float(self.rng.random())
        if gamma >= hi:
            gamma = float(np.nextafter(hi, lo))
        rule.threshold = gamma
        go_left = proj <= gamma
        if self.check_splits:
            again = self.projector.project(rule, idx)
            assert np.all(again[go_left] <= gamma) and np.all(again[~go_left] > gamma)
        return Internal(
            rule,
            self.grow(idx[go_left], depth + 1),
            self.grow(idx[~go_left], depth + 1),
            depth,
        )


_WORD_TABLES: dict[tuple[int, int], list[tuple[int, ...]]] = {}


def _word_at(dim: int, depth: int, r: int) -> tuple[int, ...]:
    table = _WORD_TABLES.get((dim, depth))
    if table is None:
        table = _WORD_TABLES.setdefault((dim, depth), list(words(dim, depth)))
    return table[r]


def resolve_threads(n_jobs: int | None = None) -> int:
    if n_jobs is None:
        n_jobs = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(n_jobs))


@dataclass(eq=False)
class Forest:
    trees: list[TreeNode]
    config: ForestConfig  # resolved: subsample and height_limit are set
    c_m: float
    grid: np.ndarray
    dim: int

    @property
    def n_points(self) -> int:
        return self.grid.size

    def _projector(self, values: np.ndarray, grid: np.ndarray) -> Projector:
        values = np.asarray(values, dtype=np.float64)
        if values.shape[1] != self.n_points or values.shape[2] != self.dim:
            raise PathError(
                f"forest was fitted on (p, d) = ({self.n_points}, {self.dim}), "
                f"got ({values.shape[1]}, {values.shape[2]})"
            )
        if not np.allclose(grid, self.grid, rtol=0, atol=1e-12):
            raise PathError("samples must be observed on the grid the forest was fitted on")
        prepared = _prepare_values(values, self.grid, self.config)
        return Projector(prepared, self.grid, self.config.depth, self.config.criterion)

    def path_lengths(self, dataset: FunctionalDataset, n_jobs: int | None = None) -> np.ndarray:
        """Per-tree path lengths, shape ``(n_trees, n_samples)``."""
        projector = self._projector(dataset.values, dataset.grid)
        idx = np.arange(dataset.n_samples)

        def one(tree: TreeNode) -> np.ndarray:
            out = np.empty(dataset.n_samples)
            _route(tree, idx, projector, out)
            return out

        threads = resolve_threads(n_jobs)
        if threads == 1:
            rows = [one(t) for t in self.trees]
        else:
            with ThreadPoolExecutor(threads) as pool:
                rows = list(pool.map(one, self.trees))
        return np.stack(rows)

    def scores_from_lengths(self, lengths: np.ndarray) -> np.ndarray:
        mean = lengths.mean(axis=0)
        if self.c_m == 0:
            return np.ones_like(mean)
        return np.power(2.0, -mean / self.c_m)

    def score_all(self, dataset: FunctionalDataset, n_jobs: int | None = None) -> ScoreReport:
        scores = self.scores_from_lengths(self.path_lengths(dataset, n_jobs))
        return ScoreReport(scores, dataset.labels, dataset.ids)

    def score(self, x: FunctionalPath) -> float:
        ds = FunctionalDataset(x.times, x.values[None])
        return float(self.score_all(ds, n_jobs=1).scores[0])

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": "sigforest-model",
            "version": FORMAT_VERSION,
            "config": self.config.to_dict(),
            "c_m": self.c_m,
            "grid": self.grid.tolist(),
            "dim": self.dim,
            "trees": [_node_to_dict(t) for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Forest:
        if d.get("format") != "sigforest-model":
            raise ValueError("not a sigforest model file")
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {d.get('version')!r}")
        return cls(
            trees=[_node_from_dict(t) for t in d["trees"]],
            config=ForestConfig.from_dict(d["config"]),
            c_m=float(d["c_m"]),
            grid=np.array(d["grid"], dtype=np.float64),
            dim=int(d["dim"]),
        )


def _route(node: TreeNode, idx: np.ndarray, projector: Projector, out: np.ndarray) -> None:
    if idx.size == 0:
        return
    if isinstance(node, Leaf):
        out[idx] = node.depth + avg_unsuccessful_bst_path(node.size)
        return
    proj = projector.project(node.rule, idx)
    left = proj <= node.rule.threshold
    _route(node.left, idx[left], projector, out)
    _route(node.right, idx[~left], projector, out)


def fit(
    dataset: FunctionalDataset,
    config: ForestConfig | None = None,
    n_jobs: int | None = None,
    check_splits: bool = False,
) -> Forest:
    """Grow ``config.n_trees`` trees, each on its own uniform subsample.

    ``n_jobs`` (default: ``$SIGFOREST_THREADS`` or 1) only changes speed; the
    result is identical for any thread count.
    """
    config = config or ForestConfig()
    if dataset.n_samples < 2:
        raise ValueError(f"need at least 2 samples to fit, got {dataset.n_samples}")
    cfg = config.resolved(dataset.n_samples)
    raw = dataset.values
    values = _prepare_values(raw, dataset.grid, cfg)
    projector = Projector(values, dataset.grid, cfg.depth, cfg.criterion)
    sampler = None
    if cfg.criterion in (Criterion.KSIF, Criterion.FIF):
        pool_rng = derive_rng(cfg.seed, "dictionary-pool") if cfg.dictionary.pool_size else None
        sampler = DictionarySampler(cfg.dictionary, dataset.grid, dataset.dim, pool_rng)

    def build(i: int) -> TreeNode:
        rng = derive_rng(cfg.seed, "tree", i)
        idx = rng.choice(dataset.n_samples, size=cfg.subsample, replace=False)
        builder = _TreeBuilder(projector, cfg, sampler, raw, rng, check_splits)
        if cfg.dictionary.kind is DictionaryKind.SELF:
            builder.subsample_values = raw[idx]
        return builder.grow(idx, 0)

    threads = resolve_threads(n_jobs)
    if threads == 1:
        trees = [build(i) for i in range(cfg.n_trees)]
    else:
        with ThreadPoolExecutor(threads) as pool:
            trees = list(pool.map(build, range(cfg.n_trees)))
    logger.debug("fitted %d %s trees on n=%d", cfg.n_trees, cfg.criterion.value, dataset.n_samples)
    return Forest(trees, cfg, avg_unsuccessful_bst_path(cfg.subsample), dataset.grid, dataset.dim)


def project(
    x: FunctionalPath, rule: SplitRule, depth: int, time_augment: bool = False
) -> float:
    """Projection of a single curve under ``rule``."""
    values = x.values[None]
    if time_augment and rule.criterion in (Criterion.SIF, Criterion.KSIF):
        values = np.concatenate([x.times[None, :, None], values], axis=2)
    rule.window.check_fits(x.n_points)
    if rule.word is not None:
        check_word(rule.word, values.shape[2])
    projector = Projector(values, x.times, depth, rule.criterion)
    saved = rule._features
    rule._features = None
    try:
        return float(projector.project(rule, np.array([0]))[0])
    finally:
        rule._features = saved


def path_length(tree: TreeNode, x: FunctionalPath, depth: int, time_augment: bool = False) -> float:
    """Depth of the leaf reached by ``x`` plus ``c(leaf size)``."""
    node = tree
    while isinstance(node, Internal):
        node = node.left if project(x, node.rule, depth, time_augment) <= node.rule.threshold else node.right
    return node.depth + avg_unsuccessful_bst_path(node.size)


def score(forest: Forest, x: FunctionalPath) -> float:
    return forest.score(x)


def score_all(forest: Forest, dataset: FunctionalDataset, n_jobs: int | None = None) -> ScoreReport:
    return forest.score_all(dataset, n_jobs)
