"""Chain mapping between predicted and reference assemblies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..structio.types import Structure

IDENTITY_FLOOR = 0.3
_TIE_EPS = 1e-9


def lcs_length(a: str, b: str) -> int:
    """Longest common subsequence length (bit-parallel, Allison-Dix style)."""
    if not a or not b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    masks: dict[str, int] = {}
    for k, ch in enumerate(a):
        masks[ch] = masks.get(ch, 0) | (1 << k)
    full = (1 << len(a)) - 1
    v = full
    for ch in b:
        u = v & masks.get(ch, 0)
        v = ((v + u) | (v - u)) & full
    return len(a) - bin(v).count("1")


def sequence_identity(a: str, b: str) -> float:
    """Global-alignment identity with match=1, mismatch=0, gap=0.

    That alignment score is the LCS length; identity divides by the longer
    sequence.
    """
    if not a or not b:
        return 0.0
    if a == b:
        return 1.0
    return lcs_length(a, b) / max(len(a), len(b))


@dataclass(frozen=True)
class ChainMap:
    pairs: tuple[tuple[str, str], ...]  # (predicted chain, reference chain)
    score: float  # mean identity over mapped pairs
    identities: dict = field(default_factory=dict)  # "pred:ref" -> identity
    unmapped_reference: tuple[str, ...] = ()

    def pred_for(self) -> dict[str, str]:
        """reference chain -> predicted chain."""
        return {r: p for p, r in self.pairs}

    def to_dict(self) -> dict:
        return {
            "pairs": [list(p) for p in self.pairs],
            "score": self.score,
            "identities": dict(self.identities),
            "unmapped_reference": list(self.unmapped_reference),
        }


def _best_value(w: np.ndarray) -> float:
    if w.size == 0:
        return 0.0
    rows, cols = linear_sum_assignment(w, maximize=True)
    return float(w[rows, cols].sum())


def optimal_assignment(weights: np.ndarray, allowed: np.ndarray | None = None) -> list[tuple[int, int]]:
    """Maximum-weight assignment, lexicographically smallest among optima.

    Rows and columns are assumed to be in the desired tie-break order. Pairs
    not ``allowed`` are never returned; rows may stay unassigned.
    """
    w = np.asarray(weights, dtype=float)
    if allowed is None:
        allowed = np.ones(w.shape, dtype=bool)
    w = np.where(allowed, w, 0.0)
    target = _best_value(w)
    n_rows, n_cols = w.shape
    free_rows = list(range(n_rows))
    free_cols = list(range(n_cols))
    fixed = 0.0
    chosen: list[tuple[int, int]] = []
    for r in range(n_rows):
        free_rows.remove(r)
        for c in list(free_cols):
            if not allowed[r, c]:
                continue
            rest_cols = [k for k in free_cols if k != c]
            rest = _best_value(w[np.ix_(free_rows, rest_cols)]) if free_rows and rest_cols else 0.0
            if fixed + w[r, c] + rest >= target - _TIE_EPS:
                chosen.append((r, c))
                fixed += w[r, c]
                free_cols.remove(c)
                break
    return chosen


def map_chains(pred: Structure, ref: Structure, identity_floor: float = IDENTITY_FLOOR) -> ChainMap:
    """One-to-one chain assignment maximising total sequence identity.

    Reference chains whose best admissible identity is below
    ``identity_floor`` stay unmapped. Ties resolve to the lexicographically
    smallest chain ids.
    """
    pred_p, ref_p = pred.polymer(), ref.polymer()
    pred_ids = sorted(c for c in pred_p.chain_ids() if pred_p.sequence(c))
    ref_ids = sorted(c for c in ref_p.chain_ids() if ref_p.sequence(c))
    if not pred_ids or not ref_ids:
        raise ValueError("both structures need at least one protein chain")
    pred_seq = {c: pred_p.sequence(c) for c in pred_ids}
    ref_seq = {c: ref_p.sequence(c) for c in ref_ids}
    ident = np.array([[sequence_identity(pred_seq[p], ref_seq[r]) for p in pred_ids] for r in ref_ids])
    allowed = ident >= identity_floor
    chosen = optimal_assignment(ident, allowed)
    pairs = tuple((pred_ids[c], ref_ids[r]) for r, c in chosen)
    mapped_ref = {r for _, r in pairs}
    ids = {f"{p}:{r}": float(ident[ref_ids.index(r), pred_ids.index(p)]) for p, r in pairs}
    score = float(np.mean(list(ids.values()))) if ids else 0.0
    return ChainMap(
        pairs=pairs,
        score=score,
        identities=ids,
        unmapped_reference=tuple(r for r in ref_ids if r not in mapped_ref),
    )


@dataclass(frozen=True, eq=False)
class AtomCorrespondence:
    pred_index: np.ndarray
    ref_index: np.ndarray
    n_unmatched_ref: int
    n_unmatched_pred: int


def match_atoms(pred: Structure, ref: Structure, chain_map: ChainMap | None = None) -> AtomCorrespondence:
    """Pair heavy atoms by (mapped chain, residue number, insertion code, atom name).

    Indices refer to positions in ``pred`` and ``ref`` themselves. Without a
    chain map chains are matched by identical id.
    """
    if chain_map is None:
        shared = set(pred.chain_ids()) & set(ref.chain_ids())
        to_ref = {c: c for c in shared}
    else:
        to_ref = {p: r for p, r in chain_map.pairs}
    lookup: dict[tuple, int] = {}
    for i, a in enumerate(pred.atoms):
        if a.is_hydrogen or a.chain_id not in to_ref:
            continue
        lookup[(to_ref[a.chain_id], a.residue_seq, a.insertion_code, a.name)] = i
    pi, ri = [], []
    n_ref_heavy = 0
    for j, a in enumerate(ref.atoms):
        if a.is_hydrogen:
            continue
        n_ref_heavy += 1
        i = lookup.get(a.atom_key)
        if i is not None:
            pi.append(i)
            ri.append(j)
    n_pred_heavy = sum(1 for a in pred.atoms if not a.is_hydrogen)
    return AtomCorrespondence(
        np.array(pi, dtype=int),
        np.array(ri, dtype=int),
        n_ref_heavy - len(ri),
        n_pred_heavy - len(pi),
    )
