"""Docking RMSD (plain and symmetry-corrected) and centroid RMSD."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GeometryError
from ..geometry import centroid
from ..molgraph import AUTOMORPHISM_CAP, AtomMapping, AutomorphismSet, automorphisms, match_template
from ..structio.types import MoleculeGraph


def _points(x) -> np.ndarray:
    if isinstance(x, MoleculeGraph):
        h = x.heavy()
        if h.coords is None:
            raise GeometryError("molecule graph has no coordinates")
        return h.coords
    arr = np.asarray(x, dtype=float)
    return arr.reshape(-1, 3)


def rmsd(pred, ref) -> float:
    """Root-mean-square deviation of corresponding points, no superposition."""
    p, r = _points(pred), _points(ref)
    if len(p) != len(r):
        raise GeometryError(f"point lists differ in length: {len(p)} vs {len(r)}")
    if len(p) == 0:
        raise GeometryError("rmsd of empty point lists")
    return float(np.sqrt(np.mean(np.sum((p - r) ** 2, axis=1))))


def centroid_rmsd(pred, ref) -> float:
    """Distance between heavy-atom centroids; the two sides may differ in size."""
    p, r = _points(pred), _points(ref)
    if len(p) == 0 or len(r) == 0:
        raise GeometryError("centroid RMSD needs non-empty point lists")
    return float(np.linalg.norm(centroid(p) - centroid(r)))


@dataclass(frozen=True, eq=False)
class SymmetryRMSD:
    value: float
    naive: float
    truncated: bool
    n_automorphisms: int
    # best correspondence: pred heavy index for every ref heavy index
    assignment: np.ndarray

    @property
    def lower_bound_uncertain(self) -> bool:
        return self.truncated


def _batched_msd(candidates: np.ndarray, ref: np.ndarray) -> np.ndarray:
    return np.mean(np.sum((candidates - ref[None]) ** 2, axis=2), axis=1)


def _batched_superposed_msd(candidates: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """MSD after optimal rigid superposition of each candidate onto ``ref``."""
    c = candidates - candidates.mean(axis=1, keepdims=True)
    r = ref - ref.mean(axis=0)
    if len(ref) < 3:
        return _batched_msd(c, r)
    H = np.einsum("kni,nj->kij", c, r)
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(U) * np.linalg.det(Vt))
    d[d == 0] = 1.0
    D = np.zeros((len(c), 3, 3))
    D[:, 0, 0] = 1.0
    D[:, 1, 1] = 1.0
    D[:, 2, 2] = d
    R = np.transpose(Vt, (0, 2, 1)) @ D @ np.transpose(U, (0, 2, 1))
    moved = np.einsum("kij,knj->kni", R, c)
    return _batched_msd(moved, r)


def rmsd_symmetry_corrected(
    pred: MoleculeGraph,
    ref: MoleculeGraph,
    mapping: AtomMapping | None = None,
    *,
    cap: int = AUTOMORPHISM_CAP,
    use_charges: bool = True,
    use_bond_orders: bool | None = None,
    pre_align: bool = False,
    symmetry: AutomorphismSet | None = None,
) -> SymmetryRMSD:
    """Minimum RMSD over all graph automorphisms of the reference.

    ``mapping`` pairs reference (template) heavy indices with predicted heavy
    indices; it is found with ``match_template`` when omitted. With
    ``pre_align`` each candidate is optimally superposed first (the
    ligand-aligned RMSD variant); otherwise coordinates are compared in place.
    """
    p, r = _points(pred), _points(ref)
    # matching and symmetry must use the same labels, or the coset is wrong
    orders = use_bond_orders is not False and pred.bond_orders_known and ref.bond_orders_known
    if mapping is None:
        mapping = match_template(ref, pred, use_charges=use_charges, use_bond_orders=orders)
    m = mapping.as_array()
    if len(m) != len(r) or len(p) != len(r):
        raise GeometryError("mapping does not cover every heavy atom")
    if symmetry is None:
        symmetry = automorphisms(ref, cap, use_charges=use_charges, use_bond_orders=orders)
    perms = symmetry.perms
    candidates = p[m[perms]]  # (k, n, 3): pred atom matched to ref atom i under sigma
    msd = _batched_superposed_msd(candidates, r) if pre_align else _batched_msd(candidates, r)
    best = int(np.argmin(msd))
    return SymmetryRMSD(
        value=float(np.sqrt(max(msd[best], 0.0))),
        naive=float(np.sqrt(max(msd[0], 0.0))),
        truncated=symmetry.truncated,
        n_automorphisms=len(perms),
        assignment=m[perms[best]],
    )
