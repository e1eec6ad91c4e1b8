"""Dataset-level analyses: failure annotation histograms and interaction distributions."""

from __future__ import annotations

import csv
import io
from collections import Counter
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..metrics.scores import ComplexScore
from ..plif.types import Fingerprint, InteractionType
from .aggregate import success_units
from .config import SuccessCriteria

UNANNOTATED = "UNANNOTATED"


def read_annotations(path: str | Path) -> dict[str, list[str]]:
    """TSV of ``target_id<TAB>keyword[;keyword...]``; lines starting with '#' are skipped."""
    out: dict[str, list[str]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh, delimiter="\t"):
            if not row or row[0].startswith("#"):
                continue
            target = row[0].strip()
            words = [w.strip() for w in (row[1] if len(row) > 1 else "").split(";") if w.strip()]
            out.setdefault(target, []).extend(words)
    return out


def complex_succeeded(score: ComplexScore, criteria: SuccessCriteria) -> bool:
    """RMSD & PB-Valid success; in multi mode every fragment must succeed."""
    units = success_units(score, criteria)
    return bool(units) and all(u["rmsd_pb_valid_success"] for u in units)


def failed_targets(
    scores_by_method: Mapping[str, Iterable[ComplexScore]],
    criteria: SuccessCriteria = SuccessCriteria(),
    method: str | None = None,
) -> list[str]:
    """Targets no method (or just ``method``) solved in any run. Exclusions count as failures."""
    methods = [method] if method is not None else sorted(scores_by_method)
    solved: dict[str, set[str]] = {}
    targets: set[str] = set()
    for m in methods:
        for s in scores_by_method[m]:
            targets.add(s.target_id)
            if complex_succeeded(s, criteria):
                solved.setdefault(s.target_id, set()).add(m)
    return sorted(t for t in targets if t not in solved)


def annotate_failures(
    scores_by_method: Mapping[str, Iterable[ComplexScore]],
    annotations: Mapping[str, Sequence[str] | str],
    criteria: SuccessCriteria = SuccessCriteria(),
    method: str | None = None,
) -> dict[str, int]:
    """Histogram of annotation keywords over failed targets, most common first."""
    hist: Counter = Counter()
    for target in failed_targets(scores_by_method, criteria, method):
        words = annotations.get(target)
        if isinstance(words, str):
            words = [words]
        if not words:
            hist[UNANNOTATED] += 1
            continue
        for w in words:
            hist[w] += 1
    return dict(sorted(hist.items(), key=lambda kv: (-kv[1], kv[0])))


def _quartiles(v: np.ndarray) -> tuple[float, float, float]:
    q1, q2, q3 = np.percentile(v, [25, 50, 75])
    return float(q1), float(q2), float(q3)


SUMMARY_FIELDS = ("dataset", "method", "interaction_type", "n_complexes", "mean", "std", "min", "q1", "median", "q3", "iqr", "max")


def interaction_distribution(
    fingerprints: Mapping[tuple[str, str], Sequence[Fingerprint]],
) -> tuple[list[dict], list[dict]]:
    """Per (dataset, method) count distributions for every interaction type.

    Returns summary rows (mean, sample std, quartiles with linear
    interpolation, min/max) and long-format histogram rows
    (count value -> number of complexes). Types absent everywhere still get
    all-zero rows.
    """
    summary, hist = [], []
    for dataset, method in sorted(fingerprints):
        fps = list(fingerprints[dataset, method])
        for itype in sorted(InteractionType, key=lambda t: t.value):
            counts = np.array([fp.by_type().get(itype.value, 0) for fp in fps], dtype=float)
            if len(counts) == 0:
                counts = np.zeros(1)
                n = 0
            else:
                n = len(counts)
            q1, q2, q3 = _quartiles(counts)
            summary.append(
                {
                    "dataset": dataset,
                    "method": method,
                    "interaction_type": itype.value,
                    "n_complexes": n,
                    "mean": float(counts.mean()),
                    "std": float(counts.std(ddof=1)) if len(counts) > 1 else 0.0,
                    "min": float(counts.min()),
                    "q1": q1,
                    "median": q2,
                    "q3": q3,
                    "iqr": q3 - q1,
                    "max": float(counts.max()),
                }
            )
            for value, freq in sorted(Counter(int(c) for c in counts).items()):
                hist.append(
                    {
                        "dataset": dataset,
                        "method": method,
                        "interaction_type": itype.value,
                        "count": value,
                        "n_complexes": freq if n else 0,
                    }
                )
    return summary, hist


def rows_to_csv(rows: Sequence[dict], fields: Sequence[str] | None = None) -> str:
    fields = list(fields or (rows[0].keys() if rows else []))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k)) for k in fields})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return v
