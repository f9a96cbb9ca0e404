"""Reading benchmark series files and persisting datasets, models and results.

Benchmark files hold one curve per row, ``label, v_1, ..., v_p``, separated
by tabs or commas (the UCR archive layout). Labels are mapped to normal (0)
and anomaly (1) through a :class:`LabelMap`; rows with any other label are
dropped and counted.

Datasets and models are stored as JSON documents tagged with a format name
and version. Floats are written with ``repr`` so they round-trip bit-exactly.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .forest import Forest
from .metrics import ScoreReport
from .path import FunctionalDataset, uniform_grid
from .seeding import derive_rng

logger = logging.getLogger(__name__)

DATASET_FORMAT = "sigforest-dataset"
DATASET_VERSION = 1


class DataError(ValueError):
    """Malformed or unusable input data."""


@dataclass(frozen=True)
class LabelMap:
    normal_labels: frozenset[int]
    anomaly_labels: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "normal_labels", frozenset(int(x) for x in self.normal_labels))
        object.__setattr__(self, "anomaly_labels", frozenset(int(x) for x in self.anomaly_labels))
        if not self.normal_labels or not self.anomaly_labels:
            raise ValueError("both label sets must be non-empty")
        if self.normal_labels & self.anomaly_labels:
            raise ValueError("normal and anomaly labels must be disjoint")

    def encode(self, label: int) -> int | None:
        if label in self.normal_labels:
            return 0
        if label in self.anomaly_labels:
            return 1
        return None


@dataclass(frozen=True)
class BenchmarkPreset:
    name: str
    n_points: int
    labels: LabelMap
    n_anomalies: int
    n_samples: int
    aliases: tuple[str, ...] = ()


def _preset(name, p, normal, anomaly, n_a, n, aliases=()):
    return BenchmarkPreset(name, p, LabelMap(frozenset(normal), frozenset(anomaly)), n_a, n, aliases)


PRESETS: dict[str, BenchmarkPreset] = {
    p.name: p
    for p in [
        _preset("Chinatown", 24, {2}, {1}, 4, 14),
        _preset("Coffee", 286, {1}, {0}, 5, 19),
        _preset("ECGFiveDays", 136, {1}, {2}, 2, 16),
        _preset("ECG200", 96, {1}, {-1}, 31, 100),
        _preset("HandOutlines", 2709, {1}, {0}, 362, 1000, ("Handoutlines",)),
        _preset("SonyAIBORobotSurface1", 70, {2}, {1}, 6, 20, ("SonyRobotAI1",)),
        _preset("SonyAIBORobotSurface2", 65, {2}, {1}, 4, 20, ("SonyRobotAI2",)),
        _preset("StarLightCurves", 1024, {3}, {1, 2}, 100, 673),
        _preset("TwoLeadECG", 82, {1}, {2}, 2, 14),
        _preset("ECG5000", 140, {1}, {3, 4, 5}, 31, 323),
    ]
}

FETCH_HINT = (
    "Benchmark series are not bundled. Download the UCR Time Series Archive "
    "(https://www.cs.ucr.edu/~eamonn/time_series_data_2018/) and place "
    "<Name>_TRAIN.tsv / <Name>_TEST.tsv either directly in the data directory "
    "or in a <Name>/ sub-directory."
)


def get_preset(name: str) -> BenchmarkPreset:
    for preset in PRESETS.values():
        if name == preset.name or name in preset.aliases:
            return preset
    raise KeyError(f"no preset named {name!r}")


def _parse_label(token: str, lineno: int) -> int:
    try:
        value = float(token)
    except ValueError:
        raise DataError(f"line {lineno}: unparseable label {token!r}") from None
    if not value.is_integer():
        raise DataError(f"line {lineno}: label {token!r} is not an integer")
    return int(value)


def load_series_file(path: str | Path, label_map: LabelMap) -> FunctionalDataset:
    """Read a ``label, values...`` file onto the uniform grid ``t_i = i / (p - 1)``.

    The number of rows dropped for unmapped labels is logged and stored in
    ``dataset.meta["dropped"]``.
    """
    path = Path(path)
    text = path.read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty file")
    delimiter = "\t" if "\t" in lines[0] else ","
    labels: list[int] = []
    rows: list[list[float]] = []
    dropped = 0
    width = None
    for lineno, row in enumerate(csv.reader(lines, delimiter=delimiter), start=1):
        row = [tok.strip() for tok in row]
        if width is None:
            width = len(row)
            if width < 3:
                raise DataError(f"{path}: rows need a label and at least 2 values")
        elif len(row) != width:
            raise DataError(f"{path}: line {lineno} has {len(row)} fields, expected {width}")
        label = _parse_label(row[0], lineno)
        try:
            values = [float(tok) for tok in row[1:]]
        except ValueError as exc:
            raise DataError(f"{path}: line {lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in values):
            raise DataError(f"{path}: line {lineno} holds non-finite values")
        encoded = label_map.encode(label)
        if encoded is None:
            dropped += 1
            continue
        labels.append(encoded)
        rows.append(values)
    if dropped:
        logger.warning("%s: dropped %d rows with unmapped labels", path.name, dropped)
    if not rows:
        raise DataError(f"{path}: no rows left after label mapping")
    p = width - 1
    return FunctionalDataset(
        uniform_grid(p),
        np.array(rows)[:, :, None],
        np.array(labels),
        meta={"source": str(path), "dropped": dropped},
    )


def find_benchmark_files(data_dir: str | Path, name: str) -> tuple[Path | None, Path | None]:
    """Locate ``<name>_TRAIN`` / ``<name>_TEST`` files (``.tsv``, ``.txt`` or none)."""
    data_dir = Path(data_dir)
    preset_names = [name]
    try:
        preset = get_preset(name)
        preset_names = [preset.name, *preset.aliases]
    except KeyError:
        pass
    found: dict[str, Path | None] = {"TRAIN": None, "TEST": None}
    for split in found:
        for nm in preset_names:
            for base in (data_dir, data_dir / nm):
                for ext in (".tsv", ".txt", ".csv", ""):
                    cand = base / f"{nm}_{split}{ext}"
                    if cand.is_file() and found[split] is None:
                        found[split] = cand
    return found["TRAIN"], found["TEST"]


def load_benchmark(
    data_dir: str | Path, name: str, split: str = "train", match_table: bool = False, seed: int = 0
) -> FunctionalDataset:
    """Load a preset benchmark dataset and verify its grid size.

    ``match_table`` subsamples anomalies (seeded) so that the anomaly count
    matches the preset's ``n_anomalies / n_samples`` ratio.
    """
    preset = get_preset(name)
    train, test = find_benchmark_files(data_dir, preset.name)
    path = train if split == "train" else test
    if path is None:
        raise FileNotFoundError(f"{preset.name} ({split}) not found under {data_dir}. {FETCH_HINT}")
    ds = load_series_file(path, preset.labels)
    if ds.n_points != preset.n_points:
        raise DataError(f"{preset.name}: expected {preset.n_points} points per curve, got {ds.n_points}")
    if match_table:
        ds = match_anomaly_ratio(ds, preset.n_anomalies / preset.n_samples, seed)
    return ds


def match_anomaly_ratio(ds: FunctionalDataset, ratio: float, seed: int = 0) -> FunctionalDataset:
    """Keep all normal samples and a seeded subset of anomalies giving ``ratio``."""
    normal = np.flatnonzero(ds.labels == 0)
    anomalous = np.flatnonzero(ds.labels == 1)
    want = int(round(ratio * normal.size / (1.0 - ratio)))
    want = max(1, min(want, anomalous.size))
    rng = derive_rng(seed, "match-ratio")
    keep = np.sort(np.r_[normal, rng.choice(anomalous, size=want, replace=False)])
    return ds.subset(keep)


# ---------------------------------------------------------------------------
# dataset files


def dataset_to_dict(ds: FunctionalDataset) -> dict[str, Any]:
    return {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "encoding": "json-float64-repr",
        "n": ds.n_samples,
        "p": ds.n_points,
        "d": ds.dim,
        "grid": ds.grid.tolist(),
        "ids": list(ds.ids),
        "labels": None if ds.labels is None else ds.labels.tolist(),
        "samples": ds.values.tolist(),
    }


def dataset_from_dict(doc: dict[str, Any]) -> FunctionalDataset:
    if doc.get("format") != DATASET_FORMAT:
        raise DataError("not a sigforest dataset document")
    if doc.get("version") != DATASET_VERSION:
        raise DataError(f"unsupported dataset format version {doc.get('version')!r}")
    samples = np.array(doc["samples"], dtype=np.float64)
    if samples.size == 0:
        raise DataError("dataset file holds no samples")
    if samples.shape != (doc["n"], doc["p"], doc["d"]):
        raise DataError(f"sample array shape {samples.shape} disagrees with header")
    return FunctionalDataset(
        np.array(doc["grid"], dtype=np.float64),
        samples,
        None if doc["labels"] is None else np.array(doc["labels"]),
        tuple(doc["ids"]),
    )


def save_dataset(ds: FunctionalDataset, path: str | Path) -> None:
    if ds.n_samples < 1:
        raise DataError("refusing to save an empty dataset")
    Path(path).write_text(json.dumps(dataset_to_dict(ds)) + "\n")


def load_dataset(path: str | Path) -> FunctionalDataset:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from None
    return dataset_from_dict(doc)


def is_dataset_file(path: str | Path) -> bool:
    path = Path(path)
    if path.suffix != ".json" or not path.is_file():
        return False
    with path.open() as fh:
        head = fh.read(256)
    return f'"format": "{DATASET_FORMAT}"' in head


# ---------------------------------------------------------------------------
# models


def save_model(forest: Forest, path: str | Path) -> None:
    Path(path).write_text(json.dumps(forest.to_dict()) + "\n")


def load_model(path: str | Path) -> Forest:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from None
    try:
        return Forest.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed model file ({exc})") from None


# ---------------------------------------------------------------------------
# results

METRIC_FIELDS = ("dataset", "method", "metric", "value", "seed")


def scores_csv(report: ScoreReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "score", "label"])
    labels = report.labels if report.labels is not None else [None] * len(report)
    for i, s, y in zip(report.ids, report.scores, labels):
        writer.writerow([i, repr(float(s)), "" if y is None else int(y)])
    return buf.getvalue()


def export_scores(report: ScoreReport, path: str | Path) -> None:
    Path(path).write_text(scores_csv(report))


def read_scores(path: str | Path) -> ScoreReport:
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    labels = [r["label"] for r in rows]
    has_labels = all(lbl != "" for lbl in labels)
    return ScoreReport(
        np.array([float(r["score"]) for r in rows]),
        np.array([int(x) for x in labels]) if has_labels and rows else None,
        tuple(r["id"] for r in rows),
    )


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def export_metrics(records: Iterable[dict[str, Any]], path: str | Path) -> None:
    """Write metric records as CSV (``.csv``) or JSON lines (``.jsonl``)."""
    path = Path(path)
    records = list(records)
    if path.suffix == ".jsonl":
        text = "".join(json.dumps({k: r[k] for k in METRIC_FIELDS}) + "\n" for r in records)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(METRIC_FIELDS)
        for r in records:
            writer.writerow([_fmt(r[k]) for k in METRIC_FIELDS])
        text = buf.getvalue()
    path.write_text(text)
