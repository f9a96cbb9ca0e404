from __future__ import annotations

import csv
import hashlib
import json

import numpy as np
import pytest

from sigforest import dataio
from sigforest.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main, parse_method, parse_values, UsageError
from sigforest.forest import Criterion, ForestConfig


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture()
def swap_file(tmp_path):
    out = tmp_path / "swap.json"
    assert main(["simulate", "--scenario", "swap", "--n", "40", "--seed", "7", "--out", str(out)]) == EXIT_OK
    return out


def test_simulate_writes_dataset_and_manifest(swap_file):
    ds = dataio.load_dataset(swap_file)
    assert ds.n_samples == 40 and int(ds.labels.sum()) == 4
    manifest = json.loads(swap_file.with_name("swap.json.manifest.json").read_text())
    assert manifest["status"] == "ok" and manifest["seed"] == 7
    assert manifest["hashes"][str(swap_file)] == _sha(swap_file)


def test_simulate_params_and_usage_errors(tmp_path, capsys):
    out = tmp_path / "d.json"
    assert main(["simulate", "--scenario", "noise-interval", "--n", "10", "--param", "noise_sd=0", "--out", str(out)]) == 0
    assert np.all(np.ptp(dataio.load_dataset(out).values, axis=1) == 0)
    assert main(["simulate", "--scenario", "nope", "--out", str(out)]) == EXIT_USAGE
    assert main(["simulate", "--out", str(out)]) == EXIT_USAGE
    assert main(["simulate", "--scenario", "swap", "--param", "bogus=1", "--out", str(out)]) == EXIT_USAGE
    assert main(["simulate", "--scenario", "swap", "--param", "novalue", "--out", str(out)]) == EXIT_USAGE


def test_fit_and_score(tmp_path, swap_file):
    model = tmp_path / "m.json"
    rc = main(["fit", "--data", str(swap_file), "--model-out", str(model), "--criterion", "ksif",
               "--trees", "10", "--depth", "2", "--windows", "5", "--dictionary", "cosine", "--time-augment"])
    assert rc == EXIT_OK
    forest = dataio.load_model(model)
    assert forest.config.criterion is Criterion.KSIF and forest.config.time_augment
    assert forest.config.subsample == 40 and forest.config.height_limit == 6
    scores, metrics = tmp_path / "s.csv", tmp_path / "met.csv"
    assert main(["score", "--model", str(model), "--data", str(swap_file), "--out", str(scores),
                 "--metrics-out", str(metrics)]) == EXIT_OK
    report = dataio.read_scores(scores)
    assert len(report) == 40 and np.all((report.scores > 0) & (report.scores <= 1))
    rows = list(csv.DictReader(metrics.open()))
    assert [r["metric"] for r in rows] == ["auroc", "aupr", "fpr_at_95tpr"]


def test_fit_defaults(tmp_path, swap_file):
    model = tmp_path / "m.json"
    assert main(["fit", "--data", str(swap_file), "--model-out", str(model), "--trees", "3"]) == 0
    cfg = dataio.load_model(model).config
    assert (cfg.depth, cfg.windows, cfg.criterion) == (3, 10, Criterion.SIF)


@pytest.mark.parametrize("alpha", ["1.5", "-0.2"])
def test_alpha_outside_unit_interval_is_usage_error(tmp_path, swap_file, alpha):
    assert main(["fit", "--data", str(swap_file), "--model-out", str(tmp_path / "m.json"), "--alpha", alpha]) == EXIT_USAGE


def test_data_errors(tmp_path):
    model = tmp_path / "m.json"
    assert main(["fit", "--data", str(tmp_path / "missing.json"), "--model-out", str(model)]) == EXIT_DATA
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert main(["fit", "--data", str(bad), "--model-out", str(model)]) == EXIT_DATA
    manifest = json.loads((tmp_path / "m.json.manifest.json").read_text())
    assert manifest["status"] == "failed" and "error" in manifest


def test_numeric_error_exit_code(tmp_path, swap_file, monkeypatch):
    model = tmp_path / "m.json"
    main(["fit", "--data", str(swap_file), "--model-out", str(model), "--trees", "2"])
    from sigforest import forest as forest_mod

    monkeypatch.setattr(forest_mod.Forest, "scores_from_lengths", lambda self, lengths: np.full(lengths.shape[1], np.nan))
    assert main(["score", "--model", str(model), "--data", str(swap_file), "--out", str(tmp_path / "s.csv")]) == EXIT_NUMERIC


def test_config_file_and_flag_precedence(tmp_path, swap_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"criterion": "if", "trees": 4, "seed": 11}))
    model = tmp_path / "m.json"
    assert main(["fit", "--data", str(swap_file), "--model-out", str(model), "--config", str(cfg), "--trees", "6"]) == 0
    c = dataio.load_model(model).config
    assert c.criterion is Criterion.IF and c.n_trees == 6 and c.seed == 11
    cfg.write_text(json.dumps({"unknown_key": 1}))
    assert main(["fit", "--data", str(swap_file), "--model-out", str(model), "--config", str(cfg)]) == EXIT_USAGE


def test_parse_method():
    base = ForestConfig()
    assert parse_method("sif", base).criterion is Criterion.SIF
    k = parse_method("ksif-wavelet", base)
    assert k.criterion is Criterion.KSIF and k.dictionary.kind.value == "wavelet"
    f = parse_method("fif-cosine-a0", base)
    assert f.alpha == 0.0 and f.dictionary.kind.value == "cosine"
    assert parse_method("fif-a0.5", base).alpha == 0.5
    for bad in ("xif", "ksif-fourier", "sif-extra", "fif-a2"):
        with pytest.raises(UsageError):
            parse_method(bad, base)


def test_parse_values():
    assert parse_values("1..4", ()) == [1, 2, 3, 4]
    assert parse_values("2,3", ()) == [2, 3]
    assert parse_values(None, (5,)) == [5]
    with pytest.raises(UsageError):
        parse_values("a,b", ())


def _bench_dir(tmp_path):
    d = tmp_path / "data"
    d.mkdir()
    main(["simulate", "--scenario", "swap", "--n", "30", "--seed", "1", "--out", str(d / "swap.json")])
    main(["simulate", "--scenario", "noise-interval", "--n", "30", "--seed", "2", "--out", str(d / "noise.json")])
    return d


def test_bench_rows_and_missing_dataset(tmp_path, capsys):
    d = _bench_dir(tmp_path)
    out = tmp_path / "bench.csv"
    rc = main(["bench", "--data-dir", str(d), "--methods", "sif,ksif-brownian,fif", "--datasets", "swap,Coffee,noise",
               "--trees", "5", "--out", str(out)])
    assert rc == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    aurocs = [(r["dataset"], r["method"]) for r in rows if r["metric"] == "auroc"]
    assert aurocs == [("swap", m) for m in ("sif", "ksif-brownian", "fif")] + [("noise", m) for m in ("sif", "ksif-brownian", "fif")]
    timings = list(csv.DictReader((tmp_path / "bench.timings.csv").open()))
    assert len(timings) == 6 and all(float(t["wall_seconds"]) >= 0 for t in timings)
    manifest = json.loads((tmp_path / "bench.csv.manifest.json").read_text())
    assert manifest["errors"][0]["dataset"] == "Coffee"
    assert "Coffee" in capsys.readouterr().err


def test_bench_is_deterministic_across_threads(tmp_path):
    d = _bench_dir(tmp_path)
    outs = []
    for threads in ("1", "8"):
        out = tmp_path / f"bench{threads}.jsonl"
        assert main(["bench", "--data-dir", str(d), "--methods", "sif,ksif-cosine,if", "--trees", "8",
                     "--seed", "5", "--threads", threads, "--out", str(out)]) == 0
        outs.append(out)
    assert _sha(outs[0]) == _sha(outs[1])


def test_bench_missing_dir_and_bad_method(tmp_path):
    assert main(["bench", "--data-dir", str(tmp_path / "nope"), "--out", str(tmp_path / "b.csv")]) == EXIT_DATA
    (tmp_path / "empty").mkdir()
    assert main(["bench", "--data-dir", str(tmp_path / "empty"), "--methods", "zzz", "--out", str(tmp_path / "b.csv")]) == EXIT_USAGE


def test_sweeps(tmp_path):
    out = tmp_path / "w.csv"
    assert main(["sweep", "--param", "windows", "--values", "1,5", "--reps", "2", "--n", "30", "--trees", "5",
                 "--depth", "2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4 and {r["value"] for r in rows} == {"1", "5"}
    summary = list(csv.DictReader((tmp_path / "w.summary.csv").open()))
    assert {s["value"] for s in summary} == {"1", "5"} and all(s["reps"] == "2" for s in summary)

    out = tmp_path / "k.csv"
    assert main(["sweep", "--param", "depth", "--reps", "1", "--n", "20", "--trees", "5", "--out", str(out),
                 "--threads", "2"]) == 0
    assert [r["value"] for r in csv.DictReader(out.open())] == ["2v3", "2v4", "3v4"]


def test_sweep_rejects_zero_reps(tmp_path):
    assert main(["sweep", "--param", "windows", "--reps", "0", "--out", str(tmp_path / "w.csv")]) == EXIT_USAGE
    assert main(["sweep", "--param", "depth", "--values", "3", "--reps", "1", "--out", str(tmp_path / "k.csv")]) == EXIT_USAGE


def test_sweep_deterministic(tmp_path):
    hashes = []
    for threads in ("1", "3"):
        out = tmp_path / f"w{threads}.csv"
        main(["sweep", "--param", "windows", "--values", "2,4", "--reps", "3", "--n", "20", "--trees", "4",
              "--threads", threads, "--out", str(out)])
        hashes.append(_sha(out))
    assert hashes[0] == hashes[1]


def test_threads_env(tmp_path, swap_file, monkeypatch):
    monkeypatch.setenv("SIGFOREST_THREADS", "4")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["fit", "--data", str(swap_file), "--model-out", str(a), "--trees", "6"])
    monkeypatch.setenv("SIGFOREST_THREADS", "1")
    main(["fit", "--data", str(swap_file), "--model-out", str(b), "--trees", "6"])
    assert _sha(a) == _sha(b)


def test_fit_from_series_file(tmp_path):
    rows = [[2] + list(np.linspace(0, 1, 24) * i) for i in range(6)] + [[1] + [5.0] * 24]
    f = tmp_path / "Chinatown_TRAIN.tsv"
    f.write_text("\n".join("\t".join(map(str, r)) for r in rows))
    assert main(["fit", "--data", str(f), "--model-out", str(tmp_path / "m.json"), "--trees", "3"]) == 0
    g = tmp_path / "Mystery_TRAIN.tsv"
    g.write_text(f.read_text())
    assert main(["fit", "--data", str(g), "--model-out", str(tmp_path / "m.json")]) == EXIT_DATA


def test_version_and_help(capsys):
    assert main(["--version"]) == 0
    assert main([]) == EXIT_USAGE
