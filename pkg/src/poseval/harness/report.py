"""Batch execution and deterministic report files."""

from __future__ import annotations

import json
import os
import re
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from ..errors import AggregationError
from ..metrics.scores import ComplexScore
from .aggregate import RunAggregate, aggregate
from .analysis import rows_to_csv
from .config import PosevalConfig
from .manifest import ManifestEntry
from .pipeline import evaluate

WORKERS_ENV = "POSEVAL_WORKERS"
AGGREGATE_FIELDS = ("method", "dataset", "metric", "mean", "std", "n_runs", "n_scored", "n_excluded")


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _task(args) -> ComplexScore:
    entry, run, config = args
    return evaluate(entry, run, config)


def run_batch(
    entries: Sequence[ManifestEntry], config: PosevalConfig = PosevalConfig(), workers: int = 1
) -> dict[int, list[ComplexScore]]:
    """Evaluate every (entry, run); results come back in manifest order per run."""
    tasks = [(e, r, config) for e in entries for r in range(e.n_runs)]
    if workers <= 1 or len(tasks) <= 1:
        results = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks, chunksize=1))
    runs: dict[int, list[ComplexScore]] = {}
    for (_, r, _), score in zip(tasks, results):
        runs.setdefault(r, []).append(score)
    return dict(sorted(runs.items()))


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, two-space indent, UTF-8, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def complex_filename(target_id: str, run: int) -> str:
    safe = re.sub(r"[^A-Za-z0-9._-]", "_", target_id)
    return f"{safe}__run{run}.json"


def aggregate_rows(aggs: Sequence[RunAggregate], method: str, dataset: str) -> list[dict]:
    return [
        {
            "method": method,
            "dataset": dataset,
            "metric": a.metric_name,
            "mean": a.mean,
            "std": a.std,
            "n_runs": a.n_runs,
            "n_scored": a.n_complexes,
            "n_excluded": a.n_excluded,
        }
        for a in aggs
    ]


def write_score_dir(
    out_dir: str | Path,
    runs: dict[int, list[ComplexScore]],
    config: PosevalConfig,
    method: str = "method",
    dataset: str = "dataset",
) -> list[RunAggregate] | None:
    """Write per-complex JSONs, aggregate CSV/JSON and the config echo.

    Returns the aggregates, or None when every complex was excluded (the
    aggregate files then record that instead of numbers).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = config.to_dict()
    write_text(out / "config.json", dumps(cfg))
    for run, scores in runs.items():
        for s in scores:
            d = s.to_dict()
            d["config"] = cfg
            d["method"] = method
            d["dataset"] = dataset
            write_text(out / "complexes" / complex_filename(s.target_id, run), dumps(d))
    try:
        aggs = aggregate(runs, config.criteria)
    except AggregationError as exc:
        aggs = None
        error = str(exc)
    rows = aggregate_rows(aggs or [], method, dataset)
    write_text(out / "aggregate.csv", rows_to_csv(rows, AGGREGATE_FIELDS))
    mirror = {
        "method": method,
        "dataset": dataset,
        "criteria": config.criteria.to_dict(),
        "aggregates": [a.to_dict() for a in aggs] if aggs else [],
        "error": None if aggs else error,
        "n_runs": len(runs),
        "targets": sorted({s.target_id for r in runs.values() for s in r}),
    }
    write_text(out / "aggregate.json", dumps(mirror))
    return aggs


def load_score_dir(path: str | Path) -> tuple[dict, dict[int, list[ComplexScore]]]:
    """Read back a directory written by ``write_score_dir``."""
    path = Path(path)
    meta = json.loads((path / "aggregate.json").read_text(encoding="utf-8"))
    runs: dict[int, list[ComplexScore]] = {}
    for f in sorted((path / "complexes").glob("*.json")):
        d = json.loads(f.read_text(encoding="utf-8"))
        s = ComplexScore.from_dict(d)
        runs.setdefault(s.run, []).append(s)
    for r in runs.values():
        r.sort(key=lambda s: s.target_id)
    return meta, dict(sorted(runs.items()))
