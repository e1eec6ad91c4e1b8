"""Local distance difference test and its protein-ligand interface variant."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GeometryError
from ..geometry import cross_pairs, neighbor_pair_arrays
from ..structio.types import Structure
from .chains import ChainMap, match_atoms

PLI_CROSS_RADIUS = 6.0


@dataclass(frozen=True)
class LddtParams:
    inclusion_radius: float = 15.0
    thresholds: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    exclude_same_residue: bool = True

    def __post_init__(self):
        th = tuple(float(t) for t in self.thresholds)
        object.__setattr__(self, "thresholds", th)
        if not th or th[0] <= 0 or any(b <= a for a, b in zip(th, th[1:])):
            raise ValueError(f"thresholds must be positive and strictly increasing: {th}")
        if self.inclusion_radius <= th[-1]:
            raise ValueError("inclusion radius must exceed the largest threshold")

    def to_dict(self) -> dict:
        return {
            "inclusion_radius": self.inclusion_radius,
            "thresholds": list(self.thresholds),
            "exclude_same_residue": self.exclude_same_residue,
        }


def _preserved_fraction(d_pred: np.ndarray, d_ref: np.ndarray, thresholds) -> np.ndarray:
    """Per-pair mean over thresholds of |d_pred - d_ref| < threshold."""
    diff = np.abs(d_pred - d_ref)
    return np.mean([diff < t for t in thresholds], axis=0)


def lddt_coords(
    pred_xyz: np.ndarray,
    ref_xyz: np.ndarray,
    residue_ids=None,
    params: LddtParams = LddtParams(),
) -> float:
    """lDDT over atoms already in 1:1 correspondence.

    Neighbour sets are taken from the reference; atoms without neighbours are
    left out of the outer average.
    """
    pred_xyz = np.asarray(pred_xyz, dtype=float)
    ref_xyz = np.asarray(ref_xyz, dtype=float)
    if pred_xyz.shape != ref_xyz.shape or len(ref_xyz) == 0:
        raise GeometryError("lDDT needs equally sized, non-empty coordinate sets")
    i, j, d_ref = neighbor_pair_arrays(ref_xyz, params.inclusion_radius)
    if params.exclude_same_residue and residue_ids is not None:
        res = np.asarray(residue_ids)
        keep = res[i] != res[j]
        i, j, d_ref = i[keep], j[keep], d_ref[keep]
    if len(i) == 0:
        raise GeometryError("no atom has a neighbour within the inclusion radius")
    d_pred = np.sqrt(np.sum((pred_xyz[i] - pred_xyz[j]) ** 2, axis=1))
    score = _preserved_fraction(d_pred, d_ref, params.thresholds)
    n = len(ref_xyz)
    total = np.bincount(i, weights=score, minlength=n) + np.bincount(j, weights=score, minlength=n)
    count = np.bincount(i, minlength=n) + np.bincount(j, minlength=n)
    has = count > 0
    return float(np.mean(total[has] / count[has]))


def lddt(
    pred: Structure,
    ref: Structure,
    params: LddtParams = LddtParams(),
    chain_map: ChainMap | None = None,
) -> float:
    """All-heavy-atom lDDT of ``pred`` against ``ref``.

    Atoms are paired by chain (through ``chain_map``), residue and atom name;
    unmatched atoms are skipped.
    """
    corr = match_atoms(pred, ref, chain_map)
    if len(corr.ref_index) == 0:
        raise GeometryError("no corresponding atoms between prediction and reference")
    residue_ids = [ref.atoms[k].residue_key for k in corr.ref_index]
    # residue keys are tuples; map to integers for vectorised comparison
    codes = {key: n for n, key in enumerate(dict.fromkeys(residue_ids))}
    res = np.array([codes[k] for k in residue_ids])
    return lddt_coords(pred.coords[corr.pred_index], ref.coords[corr.ref_index], res, params)


def lddt_pli_coords(
    pred_ligand: np.ndarray,
    pred_protein: np.ndarray,
    ref_ligand: np.ndarray,
    ref_protein: np.ndarray,
    thresholds=LddtParams().thresholds,
    cross_radius: float = PLI_CROSS_RADIUS,
) -> float:
    """lDDT restricted to ligand-protein distances.

    Pairs are (ligand atom, protein atom) within ``cross_radius`` in the
    reference. Each ligand atom contributes the mean preserved fraction of its
    pairs; ligand atoms without pairs are skipped.
    """
    pred_ligand = np.asarray(pred_ligand, dtype=float).reshape(-1, 3)
    ref_ligand = np.asarray(ref_ligand, dtype=float).reshape(-1, 3)
    pred_protein = np.asarray(pred_protein, dtype=float).reshape(-1, 3)
    ref_protein = np.asarray(ref_protein, dtype=float).reshape(-1, 3)
    if pred_ligand.shape != ref_ligand.shape or pred_protein.shape != ref_protein.shape:
        raise GeometryError("prediction and reference are not in correspondence")
    li, pj, d_ref = cross_pairs(ref_ligand, ref_protein, cross_radius)
    if len(li) == 0:
        raise GeometryError("ligand has no protein contacts within the cross-pair radius")
    d_pred = np.sqrt(np.sum((pred_ligand[li] - pred_protein[pj]) ** 2, axis=1))
    score = _preserved_fraction(d_pred, d_ref, thresholds)
    n = len(ref_ligand)
    total = np.bincount(li, weights=score, minlength=n)
    count = np.bincount(li, minlength=n)
    has = count > 0
    return float(np.mean(total[has] / count[has]))


def lddt_pli(
    pred_protein: Structure,
    pred_ligand: np.ndarray,
    ref_protein: Structure,
    ref_ligand: np.ndarray,
    pocket=None,
    chain_map: ChainMap | None = None,
    params: LddtParams = LddtParams(),
    cross_radius: float = PLI_CROSS_RADIUS,
) -> float:
    """lDDT-PLI of one ligand.

    ``pred_ligand`` rows must already be ordered like ``ref_ligand`` (use the
    assignment from the symmetry-corrected RMSD). Protein atoms are the matched
    heavy atoms of the reference pocket residues.
    """
    from .pocket import pocket_correspondence

    if pocket is not None:
        pi, ri = pocket_correspondence(pred_protein, ref_protein, pocket, chain_map)
    else:
        corr = match_atoms(pred_protein, ref_protein, chain_map)
        pi, ri = corr.pred_index, corr.ref_index
    if len(ri) == 0:
        raise GeometryError("empty pocket: no matched protein atoms")
    return lddt_pli_coords(
        pred_ligand,
        pred_protein.coords[pi],
        ref_ligand,
        ref_protein.coords[ri],
        params.thresholds,
        cross_radius,
    )
