"""Per-complex score records and identical-fragment reassignment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

_BIG = 1e12


def _clean(x):
    """Make a value JSON friendly (numpy scalars, tuples, non-finite floats)."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


@dataclass
class FragmentScore:
    """Scores of one reference fragment in a multi-ligand complex."""

    ref_index: int
    ligand_id: str
    pred_index: int | None = None
    rmsd: float | None = None
    rmsd_symmetry_corrected: float | None = None
    centroid_rmsd: float | None = None
    lddt_pli: float | None = None
    truncated: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return _clean(self.__dict__)


@dataclass
class ComplexScore:
    """Every metric for one (target, run), or an exclusion with its reason.

    When ``excluded`` is set all metric fields stay None.
    """

    target_id: str
    run: int
    mode: str = "primary"
    excluded: bool = False
    reason: str | None = None
    rmsd: float | None = None
    rmsd_symmetry_corrected: float | None = None
    centroid_rmsd: float | None = None
    lddt_pli: float | None = None
    pb_valid: bool | None = None
    plif_emd: float | None = None
    per_check: dict | None = None
    flags: dict = field(default_factory=dict)
    fragments: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    METRICS = ("rmsd", "rmsd_symmetry_corrected", "centroid_rmsd", "lddt_pli", "pb_valid", "plif_emd", "per_check")

    @classmethod
    def exclude(cls, target_id: str, run: int, reason: str, mode: str = "primary", **details) -> "ComplexScore":
        return cls(target_id, run, mode, excluded=True, reason=reason, details=dict(details))

    def __post_init__(self):
        if self.excluded:
            for name in self.METRICS:
                setattr(self, name, None)
            self.fragments = []

    def to_dict(self) -> dict:
        d = {
            "target_id": self.target_id,
            "run": self.run,
            "mode": self.mode,
            "excluded": self.excluded,
            "reason": self.reason,
        }
        for name in self.METRICS:
            d[name] = getattr(self, name)
        d["flags"] = dict(self.flags)
        d["fragments"] = [f.to_dict() for f in self.fragments]
        d["details"] = self.details
        return _clean(d)

    @classmethod
    def from_dict(cls, d: dict) -> "ComplexScore":
        frags = [FragmentScore(**f) for f in d.get("fragments", [])]
        kw = {k: d.get(k) for k in cls.METRICS}
        return cls(
            d["target_id"],
            int(d["run"]),
            d.get("mode", "primary"),
            bool(d.get("excluded", False)),
            d.get("reason"),
            flags=dict(d.get("flags", {})),
            fragments=frags,
            details=dict(d.get("details", {})),
            **kw,
        )


@dataclass(frozen=True)
class FragmentAssignment:
    pairs: dict  # ref index -> pred index
    reassigned: bool


def assign_fragments(
    ref_formulas: Sequence[str],
    pred_formulas: Sequence[str],
    cost: Callable[[int, int], float],
) -> FragmentAssignment:
    """Pair reference and predicted fragments of identical formula.

    Within each formula group the pairing minimises the summed ``cost``
    (Hungarian method; groups may be rectangular). ``cost`` may return inf
    for an impossible pair. ``reassigned`` is set when the result differs from
    the positional pairing (k-th reference with k-th prediction of the same
    formula).
    """
    groups: dict[str, tuple[list[int], list[int]]] = {}
    for i, f in enumerate(ref_formulas):
        groups.setdefault(f, ([], []))[0].append(i)
    for j, f in enumerate(pred_formulas):
        if f in groups:
            groups[f][1].append(j)
    pairs: dict[int, int] = {}
    reassigned = False
    for formula in sorted(groups):
        refs, preds = groups[formula]
        if not preds:
            continue
        c = np.array([[cost(i, j) for j in preds] for i in refs], dtype=float)
        finite = np.isfinite(c)
        rows, cols = linear_sum_assignment(np.where(finite, c, _BIG))
        for r, k in zip(rows, cols):
            if finite[r, k]:
                pairs[refs[r]] = preds[k]
        positional = {refs[k]: preds[k] for k in range(min(len(refs), len(preds)))}
        if len(refs) > 1 and any(pairs.get(i) != j for i, j in positional.items()):
            reassigned = True
    return FragmentAssignment(dict(sorted(pairs.items())), reassigned)
