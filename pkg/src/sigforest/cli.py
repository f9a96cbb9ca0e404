"""Command-line front end: ``sigforest {simulate,fit,score,bench,sweep}``.

Every command writes a JSON run manifest (``<output>.manifest.json``) before
its results and completes it with SHA-256 hashes of the outputs afterwards.
All random streams derive from ``--seed``, so re-running a command with the
same inputs reproduces its result files byte for byte, whatever
``--threads`` (or ``$SIGFOREST_THREADS``) is set to.

Any option may also come from a JSON file given with ``--config``, keyed by
the option's long name with dashes replaced by underscores; command-line
flags take precedence.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__, dataio, datagen
from .dictionary import DictionaryConfig, DictionaryKind
from .forest import THREADS_ENV, Criterion, ForestConfig, fit, resolve_threads
from .metrics import NumericError, evaluate, kendall_tau
from .path import FunctionalDataset
from .seeding import derive_seed

logger = logging.getLogger("sigforest")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

# built-in defaults for options that may also come from --config
DEFAULTS: dict[str, Any] = {
    "criterion": "sif",
    "depth": 3,
    "windows": 10,
    "trees": 100,
    "subsample": 256,
    "height": None,
    "dictionary": "brownian",
    "alpha": 1.0,
    "seed": 0,
    "time_augment": False,
    "pool_size": 0,
    "cosine_freq_max": 10.0,
    "wavelet_scale_range": (0.05, 0.5),
    "threads": None,
    "n": None,
    "p": None,
    "fraction": None,
    "param": [],
    "methods": None,  # bench: sif,ksif-brownian,fif-brownian; sweep: one method per study
    "datasets": None,
    "split": "train",
    "match_table": False,
    "reps": 10,
    "values": None,
    "scenario": None,
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# option plumbing


def _add_forest_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("forest")
    g.add_argument("--criterion", choices=[c.value for c in Criterion], default=None)
    g.add_argument("--depth", type=int, default=None, help="signature truncation level k")
    g.add_argument("--windows", type=int, default=None, help="number of split windows")
    g.add_argument("--trees", type=int, default=None, help="number of trees N")
    g.add_argument("--subsample", type=int, default=None, help="subsample size cap (m = min(cap, n))")
    g.add_argument("--height", type=int, default=None, help="height limit (default ceil(log2 m))")
    g.add_argument("--dictionary", choices=[k.value for k in DictionaryKind], default=None)
    g.add_argument("--alpha", type=float, default=None, help="FIF L2 vs derivative weight")
    g.add_argument("--time-augment", action="store_const", const=True, default=None)
    g.add_argument("--pool-size", type=int, default=None, help="dictionary pool size (0 = fresh draws)")
    g.add_argument("--cosine-freq-max", type=float, default=None)
    g.add_argument("--wavelet-scale-range", type=float, nargs=2, default=None)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="JSON file of option defaults")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
    p.add_argument("--manifest", type=Path, default=None, help="manifest path (default <out>.manifest.json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sigforest", description="Signature isolation forests for functional data")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    p.add_argument("--scenario", choices=sorted(datagen.GENERATORS), default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--fraction", type=float, default=None, help="fraction of abnormal curves")
    p.add_argument("--param", action="append", default=None, metavar="KEY=VALUE", help="scenario parameter (JSON value)")
    p.add_argument("--out", type=Path, required=True)
    _add_common(p)

    p = sub.add_parser("fit", help="fit a forest and save the model")
    p.add_argument("--data", type=Path, required=True, help="dataset file (JSON) or benchmark series file")
    p.add_argument("--model-out", type=Path, required=True)
    _add_forest_options(p)
    _add_common(p)

    p = sub.add_parser("score", help="score a dataset with a saved model")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="scores CSV (id, score, label)")
    p.add_argument("--metrics-out", type=Path, default=None)
    _add_common(p)

    p = sub.add_parser("bench", help="benchmark methods over a directory of datasets")
    p.add_argument("--data-dir", type=Path, required=True)
    p.add_argument("--methods", default=None, help="comma list, e.g. sif,ksif-brownian,fif-cosine-a0,if")
    p.add_argument("--datasets", default=None, help="comma list of dataset names (default: all found)")
    p.add_argument("--split", choices=["train", "test"], default=None, help="benchmark split to fit and evaluate")
    p.add_argument("--match-table", action="store_const", const=True, default=None,
                   help="subsample anomalies to the reference anomaly ratio")
    p.add_argument("--out", type=Path, required=True, help="metrics file (.csv or .jsonl)")
    _add_forest_options(p)
    _add_common(p)

    p = sub.add_parser("sweep", help="parameter sensitivity study on synthetic data")
    p.add_argument("--param", dest="sweep_param", choices=["windows", "depth"], required=True)
    p.add_argument("--values", default=None, help="comma list or a..b range (default 1..10 / 2,3,4)")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--scenario", choices=sorted(datagen.GENERATORS), default=None)
    p.add_argument("--methods", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--out", type=Path, required=True)
    _add_forest_options(p)
    _add_common(p)
    return parser


def _resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Merge built-in defaults, the config file and explicit flags (flags win)."""
    file_cfg: dict[str, Any] = {}
    if getattr(args, "config", None) is not None:
        try:
            file_cfg = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    out: dict[str, Any] = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        out[key] = flag if flag is not None else file_cfg.get(key, default)
    return out


def forest_config(opts: dict[str, Any], **overrides: Any) -> ForestConfig:
    fields = dict(
        n_trees=opts["trees"],
        subsample=opts["subsample"],
        height_limit=opts["height"],
        depth=opts["depth"],
        windows=opts["windows"],
        criterion=opts["criterion"],
        dictionary=DictionaryConfig(
            kind=opts["dictionary"],
            cosine_freq_max=opts["cosine_freq_max"],
            wavelet_scale_range=tuple(opts["wavelet_scale_range"]),
            pool_size=opts["pool_size"],
        ),
        alpha=opts["alpha"],
        seed=opts["seed"],
        time_augment=bool(opts["time_augment"]),
    )
    fields.update(overrides)
    try:
        return ForestConfig(**fields)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_method(name: str, base: ForestConfig) -> ForestConfig:
    """Map a method label (``sif``, ``ksif-cosine``, ``fif-brownian-a0``, ``if``) onto a config."""
    parts = name.strip().lower().split("-")
    try:
        crit = Criterion(parts[0])
    except ValueError:
        raise UsageError(f"unknown method {name!r}") from None
    overrides: dict[str, Any] = {"criterion": crit}
    rest = parts[1:]
    if crit in (Criterion.KSIF, Criterion.FIF) and rest and not rest[0].startswith("a"):
        try:
            kind = DictionaryKind(rest.pop(0))
        except ValueError:
            raise UsageError(f"unknown dictionary in method {name!r}") from None
        overrides["dictionary"] = DictionaryConfig(
            kind=kind,
            cosine_freq_max=base.dictionary.cosine_freq_max,
            wavelet_scale_range=base.dictionary.wavelet_scale_range,
            pool_size=base.dictionary.pool_size,
        )
    if crit is Criterion.FIF and rest and rest[0].startswith("a"):
        try:
            overrides["alpha"] = float(rest.pop(0)[1:])
        except ValueError:
            raise UsageError(f"bad alpha suffix in method {name!r}") from None
    if rest:
        raise UsageError(f"unknown method {name!r}")
    try:
        return replace(base, **overrides)
    except ValueError as exc:
        raise UsageError(f"{name}: {exc}") from None


def derived_seed(seed: int, role: str, index: int = 0) -> int:
    state = derive_seed(seed, role, index).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def parse_values(text: str | None, default: Sequence[int]) -> list[int]:
    if text is None:
        return list(default)
    text = str(text)
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse values {text!r}") from None


def _parse_params(items: Sequence[str]) -> dict[str, Any]:
    params: dict[str, Any] = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        params[key.strip()] = tuple(value) if isinstance(value, list) else value
    return params


# ---------------------------------------------------------------------------
# manifests


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


_OPEN: list["Manifest"] = []


class Manifest:
    """Run record written before any result file and completed afterwards."""

    def __init__(self, command: str, config: dict[str, Any], seed: int, outputs: list[Path], path: Path) -> None:
        self.path = path
        self.outputs = outputs
        self.doc: dict[str, Any] = {
            "tool": "sigforest",
            "version": __version__,
            "command": command,
            "config": _jsonable(config),
            "seed": seed,
            "started": _now(),
            "outputs": [str(p) for p in outputs],
            "status": "running",
        }
        self._write()
        _OPEN.append(self)

    def _write(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(self.doc, indent=2, sort_keys=True) + "\n")

    def finish(self, status: str = "ok", **extra: Any) -> None:
        self.doc["finished"] = _now()
        self.doc["status"] = status
        self.doc["hashes"] = {str(p): _sha256(p) for p in self.outputs if p.is_file()}
        self.doc.update(_jsonable(extra))
        self._write()
        if self in _OPEN:
            _OPEN.remove(self)


def _fail_open(exc: BaseException) -> None:
    while _OPEN:
        _OPEN[-1].finish(status="failed", error=str(exc))


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _manifest_path(args: argparse.Namespace, out: Path) -> Path:
    return args.manifest or out.with_name(out.name + ".manifest.json")


# ---------------------------------------------------------------------------
# data loading


def load_any_dataset(path: Path) -> FunctionalDataset:
    """A saved dataset (``.json``) or a benchmark series file named after a preset."""
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    if path.suffix == ".json":
        return dataio.load_dataset(path)
    stem = path.stem.rsplit("_", 1)[0]
    try:
        preset = dataio.get_preset(stem)
    except KeyError:
        raise dataio.DataError(
            f"{path}: series files must be named <Preset>_TRAIN/_TEST so labels can be mapped"
        ) from None
    return dataio.load_series_file(path, preset.labels)


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args: argparse.Namespace, opts: dict[str, Any]) -> int:
    if opts["scenario"] is None:
        raise UsageError("--scenario is required")
    params = _parse_params(opts["param"] or [])
    try:
        spec = datagen.make_spec(
            opts["scenario"], n=opts["n"], p=opts["p"], fraction_abnormal=opts["fraction"],
            seed=opts["seed"], params=params,
        )
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    manifest = Manifest("simulate", {**opts, "spec": spec.__dict__}, opts["seed"], [args.out], _manifest_path(args, args.out))
    ds = datagen.generate(spec)
    dataio.save_dataset(ds, args.out)
    manifest.finish(n=ds.n_samples, p=ds.n_points, d=ds.dim)
    print(f"wrote {ds.n_samples} curves ({spec.scenario}) to {args.out}")
    return EXIT_OK


def cmd_fit(args: argparse.Namespace, opts: dict[str, Any]) -> int:
    cfg = forest_config(opts)
    manifest = Manifest("fit", {**opts, "data": args.data, "forest": cfg.to_dict()}, opts["seed"],
                        [args.model_out], _manifest_path(args, args.model_out))
    ds = load_any_dataset(args.data)
    forest = fit(ds, cfg, n_jobs=resolve_threads(opts["threads"]))
    dataio.save_model(forest, args.model_out)
    manifest.finish(resolved=forest.config.to_dict(), n=ds.n_samples)
    print(f"fitted {forest.config.n_trees} {forest.config.criterion.value} trees (m={forest.config.subsample}) -> {args.model_out}")
    return EXIT_OK


def cmd_score(args: argparse.Namespace, opts: dict[str, Any]) -> int:
    outputs = [args.out] + ([args.metrics_out] if args.metrics_out else [])
    manifest = Manifest("score", {**opts, "model": args.model, "data": args.data}, opts["seed"],
                        outputs, _manifest_path(args, args.out))
    forest = dataio.load_model(args.model)
    ds = load_any_dataset(args.data)
    report = forest.score_all(ds, n_jobs=resolve_threads(opts["threads"]))
    dataio.export_scores(report, args.out)
    if args.metrics_out:
        records = []
        if report.labels is not None and 0 < report.labels.sum() < len(report):
            for metric, value in evaluate(report).items():
                records.append({"dataset": args.data.stem, "method": forest.config.criterion.value,
                                "metric": metric, "value": value, "seed": forest.config.seed})
        dataio.export_metrics(records, args.metrics_out)
    manifest.finish()
    print(f"scored {len(report)} curves -> {args.out}")
    return EXIT_OK


def _bench_datasets(data_dir: Path, names: list[str] | None) -> list[tuple[str, Path | None]]:
    """(name, saved-dataset path or None for presets) pairs to benchmark."""
    saved = {p.stem: p for p in sorted(data_dir.glob("*.json")) if dataio.is_dataset_file(p)}
    if names is not None:
        return [(n, saved.get(n)) for n in names]
    found = [(pr.name, None) for pr in dataio.PRESETS.values() if dataio.find_benchmark_files(data_dir, pr.name)[0]]
    return found + sorted(saved.items())


def run_bench(
    data_dir: Path,
    methods: list[str],
    base: ForestConfig,
    names: list[str] | None = None,
    split: str = "train",
    match_table: bool = False,
    threads: int = 1,
) -> tuple[list[dict[str, Any]], list[dict[str, Any]], list[dict[str, str]]]:
    """Fit and evaluate every method on every dataset.

    Returns ``(metric records, timing records, errors)``; a dataset that
    fails to load is reported in ``errors`` and skipped.
    """
    configs = [(m, parse_method(m, base)) for m in methods]
    records: list[dict[str, Any]] = []
    timings: list[dict[str, Any]] = []
    errors: list[dict[str, str]] = []
    for name, saved in _bench_datasets(data_dir, names):
        try:
            if saved is not None:
                ds = dataio.load_dataset(saved)
            else:
                ds = dataio.load_benchmark(data_dir, name, split, match_table,
                                           derived_seed(base.seed, f"match/{name}"))
            if ds.labels is None or not 0 < ds.labels.sum() < ds.n_samples:
                raise dataio.DataError(f"{name}: needs both normal and anomalous labels")
        except (OSError, KeyError, ValueError) as exc:
            logger.debug("skipping %s: %s", name, exc)
            errors.append({"dataset": name, "error": str(exc)})
            continue
        for label, cfg in configs:
            seed = derived_seed(base.seed, f"bench/{name}/{label}")
            cfg = replace(cfg, seed=seed)
            t0 = time.perf_counter()
            forest = fit(ds, cfg, n_jobs=threads)
            t1 = time.perf_counter()
            report = forest.score_all(ds, n_jobs=threads)
            t2 = time.perf_counter()
            for metric, value in evaluate(report).items():
                records.append({"dataset": name, "method": label, "metric": metric, "value": value, "seed": seed})
            timings.append({"dataset": name, "method": label, "fit_seconds": t1 - t0, "score_seconds": t2 - t1,
                            "wall_seconds": t2 - t0})
            logger.info("%s %s auroc=%.3f (%.2fs)", name, label, records[-3]["value"], t2 - t0)
    return records, timings, errors


def _write_timings(timings: list[dict[str, Any]], path: Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dataset", "method", "fit_seconds", "score_seconds", "wall_seconds"])
    for t in timings:
        writer.writerow([t["dataset"], t["method"], f"{t['fit_seconds']:.4f}", f"{t['score_seconds']:.4f}",
                         f"{t['wall_seconds']:.4f}"])
    path.write_text(buf.getvalue())


def cmd_bench(args: argparse.Namespace, opts: dict[str, Any]) -> int:
    methods = [m for m in str(opts["methods"] or "sif,ksif-brownian,fif-brownian").split(",") if m.strip()]
    if not methods:
        raise UsageError("--methods must name at least one method")
    base = forest_config(opts)
    for m in methods:
        parse_method(m, base)
    names = None if opts["datasets"] is None else [n.strip() for n in str(opts["datasets"]).split(",") if n.strip()]
    if not args.data_dir.is_dir():
        raise FileNotFoundError(f"{args.data_dir}: not a directory. {dataio.FETCH_HINT}")
    timing_path = args.out.with_name(args.out.stem + ".timings.csv")
    manifest = Manifest("bench", {**opts, "data_dir": args.data_dir, "forest": base.to_dict()}, opts["seed"],
                        [args.out, timing_path], _manifest_path(args, args.out))
    records, timings, errors = run_bench(
        args.data_dir, methods, base, names, opts["split"], bool(opts["match_table"]), resolve_threads(opts["threads"])
    )
    if not records and not errors:
        print(f"no datasets found in {args.data_dir}. {dataio.FETCH_HINT}", file=sys.stderr)
    dataio.export_metrics(records, args.out)
    _write_timings(timings, timing_path)
    manifest.finish(status="ok" if records or not errors else "failed", errors=errors)
    for e in errors:
        print(f"sigforest bench: skipped {e['dataset']}: {e['error']}", file=sys.stderr)
    for r in records:
        if r["metric"] == "auroc":
            print(f"{r['dataset']:<24} {r['method']:<20} AUROC {r['value']:.3f}")
    if errors and not records:
        return EXIT_DATA
    return EXIT_OK


def _map_parallel(fn: Callable[[Any], Any], items: list[Any], threads: int) -> list[Any]:
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


def run_windows_sweep(
    scenario: str, values: list[int], reps: int, methods: list[str], base: ForestConfig,
    spec_overrides: dict[str, Any] | None = None, threads: int = 1,
) -> list[dict[str, Any]]:
    """AUROC per (method, n_windows, repetition) on freshly generated data."""
    if reps < 1:
        raise UsageError("reps must be >= 1")
    spec_overrides = spec_overrides or {}
    configs = [(m, parse_method(m, base)) for m in methods]

    def one(rep: int) -> list[dict[str, Any]]:
        ds = datagen.generate(datagen.make_spec(scenario, seed=derived_seed(base.seed, "sweep-data", rep), **spec_overrides))
        rows = []
        for label, cfg in configs:
            for w in values:
                seed = derived_seed(base.seed, f"sweep/{label}/windows/{w}", rep)
                forest = fit(ds, replace(cfg, windows=w, seed=seed), n_jobs=1)
                report = forest.score_all(ds, n_jobs=1)
                rows.append({"scenario": scenario, "method": label, "param": "windows", "value": w, "rep": rep,
                             "metric": "auroc", "result": evaluate(report)["auroc"]})
        return rows

    return [row for rows in _map_parallel(one, list(range(reps)), threads) for row in rows]


def run_depth_sweep(
    scenario: str, values: list[int], reps: int, methods: list[str], base: ForestConfig,
    spec_overrides: dict[str, Any] | None = None, threads: int = 1,
) -> list[dict[str, Any]]:
    """Kendall tau between score vectors of every pair of truncation levels."""
    if reps < 1:
        raise UsageError("reps must be >= 1")
    if len(values) < 2:
        raise UsageError("depth sweep needs at least two depths")
    spec_overrides = spec_overrides or {}
    configs = [(m, parse_method(m, base)) for m in methods]

    def one(rep: int) -> list[dict[str, Any]]:
        ds = datagen.generate(datagen.make_spec(scenario, seed=derived_seed(base.seed, "sweep-data", rep), **spec_overrides))
        rows = []
        for label, cfg in configs:
            seed = derived_seed(base.seed, f"sweep/{label}/depth", rep)
            scores = {k: fit(ds, replace(cfg, depth=k, seed=seed), n_jobs=1).score_all(ds, n_jobs=1).scores for k in values}
            for i, a in enumerate(values):
                for b in values[i + 1:]:
                    rows.append({"scenario": scenario, "method": label, "param": "depth", "value": f"{a}v{b}",
                                 "rep": rep, "metric": "kendall_tau", "result": kendall_tau(scores[a], scores[b])})
        return rows

    return [row for rows in _map_parallel(one, list(range(reps)), threads) for row in rows]


SWEEP_FIELDS = ("scenario", "method", "param", "value", "rep", "metric", "result")


def summarize_sweep(rows: list[dict[str, Any]]) -> list[dict[str, Any]]:
    groups: dict[tuple, list[float]] = {}
    for r in rows:
        groups.setdefault((r["scenario"], r["method"], r["param"], r["value"], r["metric"]), []).append(r["result"])
    out = []
    for (scenario, method, param, value, metric), vals in groups.items():
        arr = np.asarray(vals)
        out.append({"scenario": scenario, "method": method, "param": param, "value": value, "metric": metric,
                    "mean": float(np.mean(arr)), "median": float(np.median(arr)), "reps": arr.size})
    return out


def _write_rows(rows: list[dict[str, Any]], fields: Sequence[str], path: Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([repr(r[f]) if isinstance(r[f], float) else r[f] for f in fields])
    path.write_text(buf.getvalue())


def cmd_sweep(args: argparse.Namespace, opts: dict[str, Any]) -> int:
    param = args.sweep_param
    reps = int(opts["reps"])
    if reps < 1:
        raise UsageError("--reps must be >= 1")
    if param == "windows":
        values = parse_values(opts["values"], range(1, 11))
        scenario = opts["scenario"] or "noise-interval"
        methods_default = "ksif-brownian"
    else:
        values = parse_values(opts["values"], (2, 3, 4))
        scenario = opts["scenario"] or "depth"
        methods_default = "sif"
    if not values or min(values) < 1:
        raise UsageError("sweep values must be positive integers")
    methods = [m for m in str(opts["methods"] or methods_default).split(",") if m.strip()]
    base = forest_config(opts)
    spec_overrides = {k: opts[k] for k in ("n", "p") if opts[k] is not None}
    summary_path = args.out.with_name(args.out.stem + ".summary.csv")
    manifest = Manifest("sweep", {**opts, "sweep_param": param, "values": values, "scenario": scenario,
                                  "methods": methods, "forest": base.to_dict()},
                        opts["seed"], [args.out, summary_path], _manifest_path(args, args.out))
    runner = run_windows_sweep if param == "windows" else run_depth_sweep
    rows = runner(scenario, values, reps, methods, base, spec_overrides, resolve_threads(opts["threads"]))
    _write_rows(rows, SWEEP_FIELDS, args.out)
    summary = summarize_sweep(rows)
    _write_rows(summary, ("scenario", "method", "param", "value", "metric", "mean", "median", "reps"), summary_path)
    manifest.finish()
    for s in summary:
        print(f"{s['method']:<16} {s['param']}={s['value']:<6} {s['metric']} mean={s['mean']:.3f} median={s['median']:.3f}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "score": cmd_score,
    "bench": cmd_bench,
    "sweep": cmd_sweep,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = _resolve(args)
        return COMMANDS[args.command](args, opts)
    except Exception as exc:
        _fail_open(exc)
        if isinstance(exc, UsageError):
            kind, code = "error", EXIT_USAGE
        elif isinstance(exc, (NumericError, FloatingPointError)):
            kind, code = "numeric failure", EXIT_NUMERIC
        elif isinstance(exc, (OSError, ValueError)):  # DataError and PathError included
            kind, code = "data error", EXIT_DATA
        else:
            raise
        print(f"sigforest {args.command}: {kind}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
