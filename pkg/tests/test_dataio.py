from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from sigforest import dataio
from sigforest.dataio import DataError, LabelMap
from sigforest.forest import ForestConfig, fit
from sigforest.metrics import ScoreReport
from sigforest.path import FunctionalDataset, uniform_grid


def _write(path, rows, sep="\t"):
    path.write_text("\n".join(sep.join(str(v) for v in r) for r in rows) + "\n")
    return path


def test_load_series_maps_labels_and_counts_drops(tmp_path):
    f = _write(tmp_path / "X_TRAIN.tsv", [[1, 0.1, 0.2, 0.3], [2, 1, 2, 3], [3, 9, 9, 9], [1.0, 4, 5, 6]])
    ds = dataio.load_series_file(f, LabelMap(frozenset({1}), frozenset({2})))
    np.testing.assert_array_equal(ds.labels, [0, 1, 0])
    assert ds.meta["dropped"] == 1
    np.testing.assert_array_equal(ds.grid, [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(ds.values[1, :, 0], [1, 2, 3])


def test_load_series_comma_separated(tmp_path):
    f = _write(tmp_path / "a.csv", [[-1, 1, 2], [1, 3, 4]], sep=",")
    ds = dataio.load_series_file(f, dataio.get_preset("ECG200").labels)
    np.testing.assert_array_equal(ds.labels, [1, 0])


@pytest.mark.parametrize(
    "content",
    ["", "1\t0.1\t0.2\n2\t0.3\n", "x\t1\t2\n", "1\tfoo\t2\n", "1.5\t1\t2\n", "1\tnan\t2\n", "3\t1\t2\n"],
)
def test_malformed_files_raise(tmp_path, content):
    f = tmp_path / "bad.tsv"
    f.write_text(content)
    with pytest.raises(DataError):
        dataio.load_series_file(f, LabelMap(frozenset({1}), frozenset({2})))


def test_presets():
    assert dataio.get_preset("SonyRobotAI1").name == "SonyAIBORobotSurface1"
    assert dataio.get_preset("Handoutlines").n_points == 2709
    star = dataio.get_preset("StarLightCurves")
    assert star.labels.encode(1) == 1 and star.labels.encode(3) == 0
    assert len(dataio.PRESETS) == 10
    with pytest.raises(KeyError):
        dataio.get_preset("Nope")
    with pytest.raises(ValueError):
        LabelMap(frozenset({1}), frozenset({1}))


def test_load_benchmark_layouts(tmp_path):
    rows = [[2] + list(range(24)), [1] + list(range(24)), [2] + list(range(24))]
    (tmp_path / "Chinatown").mkdir()
    _write(tmp_path / "Chinatown" / "Chinatown_TEST.tsv", rows)
    _write(tmp_path / "Chinatown_TRAIN.tsv", rows)
    assert dataio.load_benchmark(tmp_path, "Chinatown").n_samples == 3
    assert dataio.load_benchmark(tmp_path, "Chinatown", split="test").labels.sum() == 1
    with pytest.raises(FileNotFoundError, match="UCR"):
        dataio.load_benchmark(tmp_path, "Coffee")
    _write(tmp_path / "TwoLeadECG_TRAIN.tsv", [[1, 1, 2], [2, 3, 4]])
    with pytest.raises(DataError):
        dataio.load_benchmark(tmp_path, "TwoLeadECG")


def test_match_anomaly_ratio():
    labels = np.r_[np.zeros(90, int), np.ones(40, int)]
    ds = FunctionalDataset(uniform_grid(3), np.zeros((130, 3)), labels)
    out = dataio.match_anomaly_ratio(ds, 0.1, seed=1)
    assert int((out.labels == 0).sum()) == 90 and int(out.labels.sum()) == 10
    again = dataio.match_anomaly_ratio(ds, 0.1, seed=1)
    assert out.ids == again.ids


@settings(max_examples=30, deadline=None)
@given(
    hnp.arrays(
        np.float64,
        st.tuples(st.integers(1, 5), st.integers(2, 6), st.integers(1, 3)),
        elements=st.floats(-1e6, 1e6, allow_subnormal=True),
    )
)
def test_dataset_round_trip_is_bit_exact(values):
    n = values.shape[0]
    ds = FunctionalDataset(uniform_grid(values.shape[1]) ** 1.5, values, np.arange(n) % 2, tuple(f"s{i}" for i in range(n)))
    back = dataio.dataset_from_dict(json.loads(json.dumps(dataio.dataset_to_dict(ds))))
    assert back == ds


def test_dataset_file_helpers(tmp_path):
    ds = FunctionalDataset(uniform_grid(4), np.arange(8.0).reshape(2, 4))
    path = tmp_path / "d.json"
    dataio.save_dataset(ds, path)
    assert dataio.is_dataset_file(path)
    assert dataio.load_dataset(path) == ds
    doc = json.loads(path.read_text())
    doc["version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(DataError):
        dataio.load_dataset(path)
    path.write_text("{not json")
    with pytest.raises(DataError):
        dataio.load_dataset(path)
    assert not dataio.is_dataset_file(tmp_path / "missing.json")


def test_model_round_trip(tmp_path):
    ds = FunctionalDataset(uniform_grid(10), np.random.default_rng(0).normal(size=(20, 10, 2)))
    forest = fit(ds, ForestConfig(n_trees=5, criterion="ksif", depth=2))
    dataio.save_model(forest, tmp_path / "m.json")
    back = dataio.load_model(tmp_path / "m.json")
    np.testing.assert_array_equal(back.score_all(ds).scores, forest.score_all(ds).scores)
    (tmp_path / "bad.json").write_text('{"format": "other"}')
    with pytest.raises(DataError):
        dataio.load_model(tmp_path / "bad.json")


def test_scores_round_trip(tmp_path):
    r = ScoreReport([0.1, 1 / 3, 0.7], [0, 1, 0], ("a", "b", "c"))
    dataio.export_scores(r, tmp_path / "s.csv")
    back = dataio.read_scores(tmp_path / "s.csv")
    np.testing.assert_array_equal(back.scores, r.scores)
    np.testing.assert_array_equal(back.labels, r.labels)
    assert back.ids == r.ids
    dataio.export_scores(ScoreReport([0.5]), tmp_path / "u.csv")
    assert dataio.read_scores(tmp_path / "u.csv").labels is None


def test_export_metrics_formats(tmp_path):
    recs = [{"dataset": "x", "method": "sif", "metric": "auroc", "value": 0.1 + 0.2, "seed": 3}]
    dataio.export_metrics(recs, tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text() == "dataset,method,metric,value,seed\nx,sif,auroc,0.30000000000000004,3\n"
    dataio.export_metrics(recs, tmp_path / "m.jsonl")
    assert json.loads((tmp_path / "m.jsonl").read_text()) == recs[0]
