"""PLIF-EMD: 1-D Wasserstein distance between interaction histograms, and PLIF-WM."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .types import Fingerprint, InteractionKey

BOTH_EMPTY = "both_empty"
ONE_SIDE_EMPTY = "one_side_empty"


@dataclass(frozen=True, eq=False)
class EmdInput:
    bin_order: tuple[InteractionKey, ...]
    u_weights: np.ndarray
    v_weights: np.ndarray
    u_empty: bool
    v_empty: bool


@dataclass(frozen=True, eq=False)
class EmdResult:
    distance: float
    bin_order: tuple[InteractionKey, ...]
    flag: str | None = None
    normalized: bool = True

    def to_dict(self) -> dict:
        return {
            "distance": self.distance,
            "bin_order": [k.to_str() for k in self.bin_order],
            "flag": self.flag,
            "normalized": self.normalized,
        }


def emd_input(u: Fingerprint, v: Fingerprint, normalize: bool = True) -> EmdInput:
    """Unify the bins of ``u`` and ``v`` and lay them out in lexicographic order."""
    bins = tuple(sorted(set(u.counts) | set(v.counts), key=InteractionKey.sort_key))
    uw = np.array([u[k] for k in bins], dtype=float)
    vw = np.array([v[k] for k in bins], dtype=float)
    u_empty, v_empty = uw.sum() == 0, vw.sum() == 0
    if normalize:
        if not u_empty:
            uw = uw / uw.sum()
        if not v_empty:
            vw = vw / vw.sum()
    return EmdInput(bins, uw, vw, bool(u_empty), bool(v_empty))


def wasserstein_1d(u_weights, v_weights) -> float:
    """W1 between two weight vectors on positions 0..B-1 (unit spacing).

    The closed form is the L1 distance between the cumulative sums. With
    unequal total mass (raw-count mode) the same sum is returned; it then
    also charges the mass difference.
    """
    u = np.asarray(u_weights, dtype=float)
    v = np.asarray(v_weights, dtype=float)
    if u.shape != v.shape:
        raise ValueError("weight vectors differ in length")
    # the last cumulative term is the total-mass difference (zero for unit mass)
    return float(np.sum(np.abs(np.cumsum(u - v))))


def plif_emd_detailed(u: Fingerprint, v: Fingerprint, normalize: bool = True) -> EmdResult:
    """PLIF-EMD with its bin order and empty-histogram flag."""
    inp = emd_input(u, v, normalize)
    if inp.u_empty and inp.v_empty:
        return EmdResult(0.0, inp.bin_order, BOTH_EMPTY, normalize)
    if inp.u_empty or inp.v_empty:
        # no transport plan exists; charge the largest bin span
        return EmdResult(float(len(inp.bin_order) - 1), inp.bin_order, ONE_SIDE_EMPTY, normalize)
    return EmdResult(wasserstein_1d(inp.u_weights, inp.v_weights), inp.bin_order, None, normalize)


def plif_emd(u: Fingerprint, v: Fingerprint, normalize: bool = True) -> float:
    """Earth mover's distance between predicted ``u`` and native ``v`` fingerprints."""
    return plif_emd_detailed(u, v, normalize).distance


def plif_wm(emds: Mapping[str, float]) -> dict[str, float]:
    """Cohort-normalised matching score: 1 - (x - min) / (max - min).

    A cohort whose EMDs are all equal scores 1.0 for every method.
    """
    if not emds:
        raise ValueError("PLIF-WM needs at least one method")
    vals = {m: float(x) for m, x in emds.items()}
    if not all(np.isfinite(x) for x in vals.values()):
        raise ValueError("PLIF-EMD values must be finite")
    lo, hi = min(vals.values()), max(vals.values())
    if hi == lo:
        return {m: 1.0 for m in vals}
    out = {}
    for m, x in vals.items():
        if x == lo:
            out[m] = 1.0
        elif x == hi:
            out[m] = 0.0
        else:
            out[m] = 1.0 - (x - lo) / (hi - lo)
    return out
