"""Command-line interface: benchmark runs, single evaluations and summaries.

Subcommands:
    run          full benchmark over a battery directory (resumable)
    cvi          evaluate one index on one labeled dataset
    optimize     maximize one index on one dataset
    score        ARI / Q of a label file against reference label files
    summarize    per-method summary statistics of the Q scores
    meta-cluster complete-linkage dendrogram over method dissimilarities

The battery layout follows the benchmark-suite convention:
``<root>/<suite>/<name>.data.gz`` plus ``<name>.labels0.gz`` (one file per
reference labeling), all optionally uncompressed.
"""

from __future__ import annotations

import argparse
import csv
import glob
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field

import numpy as np

from . import dataio, optim
from .cvi import parse_spec
from .errors import ConfigError, CviOptError
from .evaluation import (
    adjusted_rand,
    clamp_score,
    complete_linkage,
    method_dissimilarity,
)
from .nngraph import connected_components, knn_for
from .partition import cluster_size_gini, from_labels

RECORD_FIELDS = [
    "dataset",
    "method",
    "k",
    "status",
    "message",
    "labels_path",
    "ref_aris",
    "q",
    "gini",
    "seconds",
    "candidates",
    "tabu_size",
]


@dataclass
class RunConfig:
    """Keys of the JSON config accepted by ``cviopt run``."""

    battery_root: str
    output_dir: str
    specs: list[str]
    include: list[str] = field(default_factory=list)
    exclude: list[str] = field(default_factory=list)
    candidate_root: str | None = None
    seed: int = 0
    patience: int = 250
    n_random: int = 5
    n_vantage: int = 5
    vantage_v: int = 5
    kmeans_restarts: int = 10
    neighbourhood_budget: int = 50000
    min_component_policy: bool = True
    jobs: int = 1

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        try:
            with open(path, "rt", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"battery_root", "output_dir", "specs"} - set(raw)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        cfg = cls(**raw)
        if cfg.patience < 1:
            raise ConfigError("patience must be >= 1")
        if not os.path.isdir(cfg.battery_root):
            raise ConfigError(f"battery root {cfg.battery_root!r} is not a directory")
        for s in cfg.specs:
            try:
                parse_spec(s)
            except CviOptError as exc:
                raise ConfigError(f"bad spec {s!r}: {exc}") from exc
        return cfg


def derived_seed(base: int, *parts: str) -> int:
    """Stable per-(dataset, spec, k) seed derivation."""
    digest = hashlib.sha256("/".join(parts).encode("utf-8")).digest()
    return (base + int.from_bytes(digest[:8], "big")) % (2**63)


def discover_datasets(root: str) -> list[str]:
    """Dataset ids ("suite/name") under a battery root."""
    ids = set()
    for pattern in ("*/*.data", "*/*.data.gz"):
        for path in glob.glob(os.path.join(root, pattern)):
            rel = os.path.relpath(path, root)
            rel = rel[: -len(".gz")] if rel.endswith(".gz") else rel
            ids.add(rel[: -len(".data")])
    return sorted(ids)


def battery_paths(root: str, dataset_id: str) -> tuple[str, list[str]]:
    """(data file, [reference label files]) for one dataset id."""
    base = os.path.join(root, dataset_id)
    data = None
    for cand in (base + ".data.gz", base + ".data"):
        if os.path.exists(cand):
            data = cand
            break
    if data is None:
        raise ConfigError(f"no data file for {dataset_id!r} under {root!r}")
    refs = sorted(
        glob.glob(base + ".labels[0-9]*") + glob.glob(base + ".labels[0-9]*.gz")
    )
    # keep one path per labeling index (first in sort order wins)
    by_idx: dict[str, str] = {}
    for path in refs:
        stem = path[: -len(".gz")] if path.endswith(".gz") else path
        by_idx.setdefault(stem, path)
    return data, [by_idx[s] for s in sorted(by_idx)]


def load_reference_set(root: str, dataset_id: str, n: int) -> dataio.ReferenceSet | None:
    _, ref_paths = battery_paths(root, dataset_id)
    if not ref_paths:
        return None
    return dataio.ReferenceSet([dataio.load_labels(p, n) for p in ref_paths])


def _nn_component_minimum(ds: dataio.Dataset, m: int) -> int:
    comps = connected_components(knn_for(ds, m))
    return int(np.bincount(comps).min())


def run_job(cfg: RunConfig, dataset_id: str, spec_str: str, done: set) -> list[dict]:
    """All records for one (dataset, spec) pair; failures become rows."""
    rows: list[dict] = []
    spec = parse_spec(spec_str)
    data_path, _ = battery_paths(cfg.battery_root, dataset_id)
    raw = dataio.load_dataset(data_path)
    ds = dataio.preprocess(raw, derived_seed(cfg.seed, dataset_id, "preprocess"))
    refs = load_reference_set(cfg.battery_root, dataset_id, ds.n)

    def row(**kw) -> dict:
        base = {f: "" for f in RECORD_FIELDS}
        base.update({"dataset": dataset_id, "method": spec_str})
        base.update({key: str(v) for key, v in kw.items()})
        return base

    if refs is None:
        return [row(k="", status="skipped", message="no reference labels")]

    graph = None
    if spec.needs_knn:
        if spec.m >= ds.n:
            return [row(k="", status="skipped", message=f"M={spec.m} >= n={ds.n}")]
        if cfg.min_component_policy:
            smallest = _nn_component_minimum(ds, spec.m)
            if smallest < spec.m + 1:
                return [
                    row(
                        k="",
                        status="skipped",
                        message=(
                            f"{spec.m}-NN graph has a component of size "
                            f"{smallest} < M+1"
                        ),
                    )
                ]
        graph = knn_for(ds, spec.m)

    candidate_dirs = []
    if cfg.candidate_root:
        cand_dir = os.path.join(cfg.candidate_root, dataset_id)
        if os.path.isdir(cand_dir):
            candidate_dirs.append(cand_dir)

    for k in refs.distinct_cardinalities():
        if (dataset_id, spec_str, str(k)) in done:
            continue
        if k < 2:
            rows.append(row(k=k, status="skipped", message="k < 2"))
            continue
        if ds.n * (k - 1) > cfg.neighbourhood_budget:
            rows.append(
                row(
                    k=k,
                    status="skipped",
                    message=f"n(k-1)={ds.n * (k - 1)} exceeds budget",
                )
            )
            continue
        t0 = time.perf_counter()
        try:
            best, trace = optim.optimise_dataset(
                spec,
                ds,
                k,
                refs=refs,
                external_candidate_dirs=candidate_dirs,
                seed=derived_seed(cfg.seed, dataset_id, spec_str, str(k)),
                P=cfg.patience,
                n_random=cfg.n_random,
                n_vantage=cfg.n_vantage,
                vantage_v=cfg.vantage_v,
                kmeans_restarts=cfg.kmeans_restarts,
                graph=graph,
            )
        except CviOptError as exc:
            rows.append(row(k=k, status="failed", message=str(exc)))
            continue
        elapsed = time.perf_counter() - t0
        out_dir = os.path.join(cfg.output_dir, dataset_id)
        os.makedirs(out_dir, exist_ok=True)
        labels_path = os.path.join(out_dir, f"{spec_str}_k{k}.labels")
        dataio.save_labels(best.labels, labels_path)
        aris = []
        for j, (lab, card) in enumerate(zip(refs.labelings, refs.cardinalities)):
            if card == k:
                aris.append((j, adjusted_rand(lab, best.labels, exclude_noise=True)))
        q = max(clamp_score(v) for _, v in aris)
        rows.append(
            row(
                k=k,
                status="ok",
                labels_path=os.path.relpath(labels_path, cfg.output_dir),
                ref_aris=";".join(f"{j}:{v:.6f}" for j, v in aris),
                q=f"{q:.6f}",
                gini=f"{cluster_size_gini(best):.6f}",
                seconds=f"{elapsed:.3f}",
                candidates=trace.candidate_count,
                tabu_size=trace.tabu_size,
            )
        )
    return rows


def _read_records(path: str) -> list[dict]:
    if not os.path.exists(path):
        return []
    with open(path, "rt", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _write_records(path: str, rows: list[dict]) -> None:
    rows = sorted(rows, key=lambda r: (r["dataset"], r["method"], str(r["k"])))
    with open(path, "wt", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RECORD_FIELDS)
        writer.writeheader()
        writer.writerows(rows)


def _job_entry(cfg_dict: dict, dataset_id: str, spec_str: str, done: set) -> list[dict]:
    return run_job(RunConfig(**cfg_dict), dataset_id, spec_str, done)


def run_benchmark(cfg: RunConfig) -> tuple[list[dict], int]:
    """Execute every (dataset, spec) job; returns (records, failure count).

    Completed (dataset, method, k) triples found in an existing records
    file are skipped, which makes interrupted runs resumable.
    """
    datasets = discover_datasets(cfg.battery_root)
    if cfg.include:
        datasets = [d for d in datasets if d in set(cfg.include)]
    if cfg.exclude:
        datasets = [d for d in datasets if d not in set(cfg.exclude)]
    if not datasets:
        raise ConfigError("no datasets selected")

    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(
        os.path.join(cfg.output_dir, "config_snapshot.json"), "wt", encoding="utf-8"
    ) as fh:
        json.dump(asdict(cfg), fh, indent=2, sort_keys=True)

    records_path = os.path.join(cfg.output_dir, "records.csv")
    existing = _read_records(records_path)
    done = {(r["dataset"], r["method"], str(r["k"])) for r in existing if r["status"] == "ok"}

    jobs = [(d, s) for d in datasets for s in cfg.specs]
    new_rows: list[dict] = []
    if cfg.jobs <= 1:
        for d, s in jobs:
            new_rows.extend(run_job(cfg, d, s, done))
    else:
        cfg_dict = asdict(cfg)
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(_job_entry, cfg_dict, d, s, done) for d, s in jobs]
            for fut in as_completed(futures):
                new_rows.extend(fut.result())

    all_rows = existing + new_rows
    _write_records(records_path, all_rows)
    failures = sum(1 for r in all_rows if r["status"] == "failed")
    return all_rows, failures


def summarize(rows: list[dict]) -> list[dict]:
    """Per-method mean / sd / quartiles of the per-dataset Q scores.

    The dataset-level Q is the max over that dataset's per-k records.
    Quartiles use linear interpolation (type 7).
    """
    per_method: dict[str, dict[str, float]] = {}
    for r in rows:
        if r["status"] != "ok" or r["q"] == "":
            continue
        method = r["method"]
        q = float(r["q"])
        bucket = per_method.setdefault(method, {})
        bucket[r["dataset"]] = max(bucket.get(r["dataset"], 0.0), q)
    out = []
    for method in sorted(per_method):
        qs = np.array(sorted(per_method[method].values()))
        out.append(
            {
                "method": method,
                "n_datasets": qs.size,
                "mean": f"{qs.mean():.6f}",
                "sd": f"{qs.std(ddof=0):.6f}",
                "q1": f"{np.percentile(qs, 25):.6f}",
                "median": f"{np.percentile(qs, 50):.6f}",
                "q3": f"{np.percentile(qs, 75):.6f}",
            }
        )
    return out


def meta_cluster(rows: list[dict], output_dir: str, aggregators=("mean", "median", "q3")) -> list[str]:
    """Dendrograms over method dissimilarities; reference labels unused."""
    results: dict[str, dict[str, list[int]]] = {}
    for r in rows:
        if r["status"] != "ok" or not r["labels_path"]:
            continue
        path = os.path.join(output_dir, r["labels_path"])
        with open(path, "rt", encoding="utf-8") as fh:
            labels = [int(line) for line in fh if line.strip()]
        unit = f"{r['dataset']}::k{r['k']}"
        results.setdefault(r["method"], {})[unit] = labels
    written = []
    for agg in aggregators:
        names, mat = method_dissimilarity(results, agg)
        dend = complete_linkage(mat)
        path = os.path.join(output_dir, f"meta_{agg}.csv")
        with open(path, "wt", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "left", "right", "height"])
            for step, (a, b, h) in enumerate(dend.merges):
                writer.writerow([step, a, b, f"{h:.9f}"])
        legend = os.path.join(output_dir, f"meta_{agg}_methods.csv")
        with open(legend, "wt", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "method"])
            for i, name in enumerate(names):
                writer.writerow([i, name])
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# subcommand handlers


def _load_labeled(data: str, labels: str, preprocess_seed: int | None):
    raw = dataio.load_dataset(data)
    ds = raw if preprocess_seed is None else dataio.preprocess(raw, preprocess_seed)
    ext = dataio.load_labels(labels, ds.n)
    internal = optim.resolve_noise(ds, ext)
    return ds, from_labels(internal, int(internal.max()) + 1)


def _cmd_cvi(args) -> int:
    from .cvi import evaluate

    spec = parse_spec(args.spec)
    seed = None if args.raw else args.preprocess_seed
    ds, part = _load_labeled(args.data, args.labels, seed)
    print(f"{args.spec}\t{evaluate(spec, ds, part)!r}")
    return 0


def _cmd_optimize(args) -> int:
    spec = parse_spec(args.spec)
    raw = dataio.load_dataset(args.data)
    ds = raw if args.raw else dataio.preprocess(raw, args.preprocess_seed)
    refs = None
    if args.refs:
        refs = dataio.ReferenceSet([dataio.load_labels(p, ds.n) for p in args.refs])
    dirs = [args.candidates] if args.candidates else []
    best, trace = optim.optimise_dataset(
        spec,
        ds,
        args.k,
        refs=refs,
        external_candidate_dirs=dirs,
        seed=args.seed,
        P=args.patience,
    )
    if args.out:
        dataio.save_labels(best.labels, args.out)
    print(f"objective\t{trace.best_value!r}")
    print(f"candidates\t{trace.candidate_count}")
    print(f"tabu_size\t{trace.tabu_size}")
    if refs is not None:
        for j, lab in enumerate(refs.labelings):
            ari = adjusted_rand(lab, best.labels, exclude_noise=True)
            print(f"ari_ref{j}\t{ari:.6f}")
    return 0


def _cmd_score(args) -> int:
    with open(args.labels, "rt", encoding="utf-8") as fh:
        n = sum(1 for line in fh if line.strip())
    cand = dataio.load_labels(args.labels, n)
    best = 0.0
    for j, ref_path in enumerate(args.refs):
        ref = dataio.load_labels(ref_path, n)
        raw = adjusted_rand(ref, cand, exclude_noise=True)
        clamped = clamp_score(raw)
        best = max(best, clamped)
        print(f"ref{j}\traw={raw:.6f}\tclamped={clamped:.6f}")
    print(f"Q\t{best:.6f}")
    return 0


def _cmd_run(args) -> int:
    cfg = RunConfig.load(args.config)
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    rows, failures = run_benchmark(cfg)
    ok = sum(1 for r in rows if r["status"] == "ok")
    skipped = sum(1 for r in rows if r["status"] == "skipped")
    print(f"records: {len(rows)} ({ok} ok, {skipped} skipped, {failures} failed)")
    return 1 if failures else 0


def _cmd_summarize(args) -> int:
    rows = _read_records(args.records)
    table = summarize(rows)
    fields = ["method", "n_datasets", "mean", "sd", "q1", "median", "q3"]
    out = open(args.out, "wt", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=fields)
        writer.writeheader()
        writer.writerows(table)
    finally:
        if args.out:
            out.close()
    return 0


def _cmd_meta_cluster(args) -> int:
    rows = _read_records(args.records)
    output_dir = args.output_dir or os.path.dirname(os.path.abspath(args.records))
    aggs = args.aggregators.split(",")
    written = meta_cluster(rows, output_dir, aggs)
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cviopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a full benchmark from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--jobs", type=int, default=None)
    p_run.add_argument("--output-dir", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_cvi = sub.add_parser("cvi", help="evaluate one index on one labeled dataset")
    p_cvi.add_argument("--data", required=True)
    p_cvi.add_argument("--labels", required=True)
    p_cvi.add_argument("--spec", required=True)
    p_cvi.add_argument("--preprocess-seed", type=int, default=0)
    p_cvi.add_argument("--raw", action="store_true", help="skip preprocessing")
    p_cvi.set_defaults(func=_cmd_cvi)

    p_opt = sub.add_parser("optimize", help="maximize one index on one dataset")
    p_opt.add_argument("--data", required=True)
    p_opt.add_argument("--spec", required=True)
    p_opt.add_argument("--k", type=int, required=True)
    p_opt.add_argument("--refs", nargs="*", default=[])
    p_opt.add_argument("--candidates", default=None)
    p_opt.add_argument("--seed", type=int, default=0)
    p_opt.add_argument("--patience", type=int, default=optim.DEFAULT_PATIENCE)
    p_opt.add_argument("--out", default=None)
    p_opt.add_argument("--preprocess-seed", type=int, default=0)
    p_opt.add_argument("--raw", action="store_true")
    p_opt.set_defaults(func=_cmd_optimize)

    p_score = sub.add_parser("score", help="score labels against references")
    p_score.add_argument("--labels", required=True)
    p_score.add_argument("--refs", nargs="+", required=True)
    p_score.set_defaults(func=_cmd_score)

    p_sum = sub.add_parser("summarize", help="summary statistics per method")
    p_sum.add_argument("--records", required=True)
    p_sum.add_argument("--out", default=None)
    p_sum.set_defaults(func=_cmd_summarize)

    p_meta = sub.add_parser("meta-cluster", help="cluster the clustering methods")
    p_meta.add_argument("--records", required=True)
    p_meta.add_argument("--output-dir", default=None)
    p_meta.add_argument("--aggregators", default="mean,median,q3")
    p_meta.set_defaults(func=_cmd_meta_cluster)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CviOptError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
