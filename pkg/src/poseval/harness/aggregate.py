"""Run-level aggregation, cohort PLIF-WM and correlation statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy import stats

from ..errors import AggregationError
from ..metrics.scores import ComplexScore
from ..plif.emd import plif_wm
from .config import SuccessCriteria

RATE_METRICS = ("rmsd_success", "centroid_success", "rmsd_pb_valid_success")
MEAN_METRICS = ("plif_emd_mean", "lddt_pli_mean")


@dataclass(frozen=True)
class RunAggregate:
    metric_name: str
    mean: float
    std: float
    n_runs: int
    n_complexes: int  # scored (target, run) pairs summed over runs
    n_excluded: int = 0
    per_run: tuple[float, ...] = ()
    units: str = "complexes"

    def to_dict(self) -> dict:
        return {
            "metric": self.metric_name,
            "mean": self.mean,
            "std": self.std,
            "n_runs": self.n_runs,
            "n_scored": self.n_complexes,
            "n_excluded": self.n_excluded,
            "per_run": list(self.per_run),
            "units": self.units,
        }


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample standard deviation (n - 1); a single value has std 0."""
    v = np.asarray(values, dtype=float)
    if len(v) == 0:
        raise AggregationError("no values to aggregate")
    return float(np.mean(v)), float(np.std(v, ddof=1)) if len(v) > 1 else 0.0


def success_units(score: ComplexScore, criteria: SuccessCriteria) -> list[dict[str, bool]]:
    """Success indicators per scoring unit: the complex, or each fragment in multi mode."""
    if score.excluded:
        return []
    pb = bool(score.pb_valid)
    items = score.fragments if score.mode == "multi" and score.fragments else [score]
    out = []
    for it in items:
        r = it.rmsd_symmetry_corrected
        c = it.centroid_rmsd
        ok_r = r is not None and r <= criteria.rmsd_cutoff
        out.append(
            {
                "rmsd_success": ok_r,
                "centroid_success": c is not None and c <= criteria.centroid_cutoff,
                "rmsd_pb_valid_success": ok_r and (pb or not criteria.require_pb_valid),
            }
        )
    return out


def run_rates(scores: Sequence[ComplexScore], criteria: SuccessCriteria) -> dict:
    """Success rates and means for one run; excluded complexes are left out."""
    scored = [s for s in scores if not s.excluded]
    units = [u for s in scored for u in success_units(s, criteria)]
    out = {"n_scored": len(scored), "n_excluded": len(scores) - len(scored), "n_units": len(units)}
    for m in RATE_METRICS:
        out[m] = float(np.mean([u[m] for u in units])) if units else None
    emds = [s.plif_emd for s in scored if s.plif_emd is not None]
    plis = [s.lddt_pli for s in scored if s.lddt_pli is not None]
    out["plif_emd_mean"] = float(np.mean(emds)) if emds else None
    out["lddt_pli_mean"] = float(np.mean(plis)) if plis else None
    return out


def aggregate(
    runs: Mapping[int, Sequence[ComplexScore]] | Sequence[Sequence[ComplexScore]],
    criteria: SuccessCriteria = SuccessCriteria(),
) -> list[RunAggregate]:
    """Per-run rates, then mean and sample std across runs.

    Runs without any scoreable complex do not contribute to a metric; if no
    run has one the call fails.
    """
    if isinstance(runs, Mapping):
        ordered = [runs[k] for k in sorted(runs)]
    else:
        ordered = list(runs)
    if not ordered:
        raise AggregationError("no runs given")
    per_run = [run_rates(r, criteria) for r in ordered]
    if not any(p["n_scored"] for p in per_run):
        raise AggregationError("every complex was excluded; nothing to aggregate")
    multi = any(s.mode == "multi" for r in ordered for s in r)
    out = []
    for m in RATE_METRICS + MEAN_METRICS:
        vals = [p[m] for p in per_run if p[m] is not None]
        if not vals:
            continue
        mean, std = mean_std(vals)
        out.append(
            RunAggregate(
                m,
                mean,
                std,
                len(vals),
                sum(p["n_scored"] for p in per_run if p[m] is not None),
                sum(p["n_excluded"] for p in per_run),
                tuple(vals),
                "fragments" if multi and m in RATE_METRICS else "complexes",
            )
        )
    return out


@dataclass(frozen=True)
class WmReport:
    cohort: tuple[str, ...]
    emd: dict
    scores: dict
    granularity: str = "per_method_mean"
    per_complex: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "cohort": list(self.cohort),
            "granularity": self.granularity,
            "plif_emd": dict(self.emd),
            "plif_wm": dict(self.scores),
            "per_complex": self.per_complex,
        }


def plif_wm_report(mean_emds: Mapping[str, float]) -> WmReport:
    """PLIF-WM across a cohort of methods from their mean PLIF-EMD."""
    cohort = tuple(sorted(mean_emds))
    scores = plif_wm({m: mean_emds[m] for m in cohort})
    return WmReport(cohort, {m: float(mean_emds[m]) for m in cohort}, scores)


def plif_wm_per_complex(emds: Mapping[str, Mapping[str, float]]) -> WmReport:
    """Alternative granularity: PLIF-WM per target across methods, then the mean per method.

    ``emds`` maps target id to {method: PLIF-EMD}; targets missing a method
    are skipped for that method only.
    """
    per_target = {}
    acc: dict[str, list[float]] = {}
    for target in sorted(emds):
        vals = dict(emds[target])
        if not vals:
            continue
        wm = plif_wm(vals)
        per_target[target] = wm
        for m, x in wm.items():
            acc.setdefault(m, []).append(x)
    if not acc:
        raise AggregationError("no PLIF-EMD values to compare")
    cohort = tuple(sorted(acc))
    mean_emd = {}
    for m in cohort:
        vals = [emds[t][m] for t in sorted(emds) if m in emds[t]]
        mean_emd[m] = float(np.mean(vals))
    scores = {m: float(np.mean(acc[m])) for m in cohort}
    return WmReport(cohort, mean_emd, scores, "per_complex", per_target)


class Correlation(NamedTuple):
    pearson_r: float
    pearson_p: float
    spearman_rho: float
    spearman_p: float
    n: int
    p_method: str

    def to_dict(self) -> dict:
        return self._asdict()


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc, yc = x - x.mean(), y - y.mean()
    r = float(np.dot(xc, yc) / np.sqrt(np.dot(xc, xc) * np.dot(yc, yc)))
    return max(-1.0, min(1.0, r))


def _t_pvalue(r: float, n: int) -> float:
    """Two-sided p from t = r sqrt((n - 2) / (1 - r^2)) with n - 2 dof."""
    if abs(r) >= 1.0:
        return 0.0
    t = r * np.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * stats.t.sf(abs(t), n - 2))


def _perm_pvalue(x: np.ndarray, y: np.ndarray, r: float, n_perm: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.dot(xc, xc) * np.dot(yc, yc))
    perms = np.array([rng.permutation(len(y)) for _ in range(n_perm)])
    rs = (yc[perms] @ xc) / denom
    hits = int(np.sum(np.abs(rs) >= abs(r) - 1e-12))
    return (hits + 1) / (n_perm + 1)


def correlate(
    x: Sequence[float],
    y: Sequence[float],
    *,
    permutation: bool = False,
    n_permutations: int = 10_000,
    seed: int = 0,
) -> Correlation:
    """Pearson r and Spearman rho (average ranks for ties) with two-sided p-values.

    By default p-values use the t approximation for both coefficients; with
    ``permutation`` they come from a seeded permutation test instead.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D sequences of equal length")
    n = len(x)
    if n < 3:
        raise ValueError("need at least 3 paired values")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("values must be finite")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("zero variance in an input vector")
    rx, ry = stats.rankdata(x), stats.rankdata(y)
    r = _pearson(x, y)
    rho = _pearson(rx, ry)
    if permutation:
        return Correlation(
            r,
            _perm_pvalue(x, y, r, n_permutations, seed),
            rho,
            _perm_pvalue(rx, ry, rho, n_permutations, seed),
            n,
            f"permutation({n_permutations}, seed={seed})",
        )
    return Correlation(r, _t_pvalue(r, n), rho, _t_pvalue(rho, n), n, "t-approximation")
