"""Ranking metrics for anomaly scores (anomalies are the positive class)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats


class NumericError(ArithmeticError):
    """Non-finite values where finite numbers are required."""


@dataclass(frozen=True, eq=False)
class ScoreReport:
    """Per-sample anomaly scores, higher meaning more anomalous.

    ``labels`` (optional) uses 1 for anomalies and 0 for normal samples.
    """

    scores: np.ndarray
    labels: np.ndarray | None = None
    ids: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64).ravel()
        if not np.all(np.isfinite(scores)):
            raise NumericError("scores must be finite")
        object.__setattr__(self, "scores", scores)
        if self.labels is not None:
            labels = np.asarray(self.labels).ravel()
            if labels.shape != scores.shape:
                raise ValueError(f"{scores.size} scores but {labels.size} labels")
            if not np.all(np.isin(labels, (0, 1))):
                raise ValueError("labels must be 0 (normal) or 1 (anomaly)")
            object.__setattr__(self, "labels", labels.astype(np.int64))
        ids = tuple(str(i) for i in range(scores.size)) if self.ids is None else tuple(map(str, self.ids))
        if len(ids) != scores.size:
            raise ValueError(f"{scores.size} scores but {len(ids)} ids")
        object.__setattr__(self, "ids", ids)

    def __len__(self) -> int:
        return self.scores.size


def _binary(report: ScoreReport) -> tuple[np.ndarray, np.ndarray]:
    if report.labels is None:
        raise ValueError("metric needs labels")
    pos = int(report.labels.sum())
    if pos == 0 or pos == report.labels.size:
        raise ValueError("metric needs both normal and anomalous samples")
    return report.scores, report.labels


def auroc(report: ScoreReport) -> float:
    """Probability that a random anomaly outscores a random normal sample, ties counting 1/2."""
    scores, labels = _binary(report)
    ranks = stats.rankdata(scores)  # average ranks resolve ties as half credit
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _threshold_counts(scores: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative (tp, fp) when flagging every score >= each distinct value, highest first."""
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    y = labels[order]
    tp = np.cumsum(y)
    fp = np.cumsum(1 - y)
    last = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    return tp[last], fp[last]


def aupr(report: ScoreReport) -> float:
    """Area under precision-recall with step interpolation (average precision)."""
    scores, labels = _binary(report)
    tp, fp = _threshold_counts(scores, labels)
    precision = tp / (tp + fp)
    recall = tp / labels.sum()
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))


def fpr_at_tpr(report: ScoreReport, target: float = 0.95) -> float:
    """Smallest false-positive rate over thresholds whose true-positive rate reaches ``target``."""
    scores, labels = _binary(report)
    tp, fp = _threshold_counts(scores, labels)
    n_pos = labels.sum()
    n_neg = labels.size - n_pos
    ok = tp / n_pos >= target
    return float(np.min(fp[ok]) / n_neg)


def fpr_at_95tpr(report: ScoreReport) -> float:
    return fpr_at_tpr(report, 0.95)


def kendall_tau(scores_a: Sequence[float], scores_b: Sequence[float]) -> float:
    """Tie-corrected Kendall tau-b; NaN when either vector is constant."""
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("score vectors must be 1-D and of equal length")
    if a.size < 2:
        raise ValueError("need at least 2 paired scores")
    return float(stats.kendalltau(a, b, variant="b").statistic)


def evaluate(report: ScoreReport) -> dict[str, float]:
    return {
        "auroc": auroc(report),
        "aupr": aupr(report),
        "fpr_at_95tpr": fpr_at_95tpr(report),
    }
