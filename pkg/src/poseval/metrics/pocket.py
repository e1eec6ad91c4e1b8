"""Binding-pocket selection on the reference and pocket-focused superposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PocketError
from ..geometry import RigidTransform, cross_pairs, kabsch
from ..structio.types import MoleculeGraph, Structure
from .chains import ChainMap, match_atoms

POCKET_CUTOFF = 10.0


@dataclass(frozen=True)
class PocketSelection:
    residues: frozenset  # of (chain_id, residue_seq, insertion_code)
    cutoff: float = POCKET_CUTOFF

    def __contains__(self, key) -> bool:
        return key in self.residues

    def sorted_residues(self) -> list[tuple[str, int, str]]:
        return sorted(self.residues)


def ligand_heavy_coords(ligand) -> np.ndarray:
    """Heavy-atom coordinates of a MoleculeGraph, Structure or (n, 3) array."""
    if isinstance(ligand, MoleculeGraph):
        h = ligand.heavy()
        if h.coords is None:
            raise PocketError("ligand has no coordinates")
        return h.coords
    if isinstance(ligand, Structure):
        return ligand.heavy().coords
    return np.asarray(ligand, dtype=float).reshape(-1, 3)


def select_pocket(ref_protein: Structure, ref_ligands, cutoff: float = POCKET_CUTOFF) -> PocketSelection:
    """Amino-acid residues with any heavy atom within ``cutoff`` of a ligand heavy atom.

    The boundary is closed: an atom at exactly ``cutoff`` counts.
    """
    ligands = list(ref_ligands)
    if not ligands:
        raise PocketError("no reference ligands given")
    lig = np.vstack([ligand_heavy_coords(l) for l in ligands])
    protein = ref_protein.polymer().heavy()
    if len(protein) == 0:
        raise PocketError("reference has no protein heavy atoms")
    _, hit, _ = cross_pairs(lig, protein.coords, cutoff)
    residues = frozenset(protein.atoms[k].residue_key for k in np.unique(hit))
    if not residues:
        raise PocketError(f"no protein residue within {cutoff} A of the reference ligands")
    return PocketSelection(residues, cutoff)


@dataclass(frozen=True, eq=False)
class PocketAlignment:
    transform: RigidTransform
    rmsd_before: float
    rmsd_after: float
    n_atoms: int


def pocket_correspondence(pred: Structure, ref: Structure, pocket: PocketSelection, chain_map: ChainMap | None):
    """(pred indices, ref indices) of matched heavy atoms inside the pocket."""
    corr = match_atoms(pred, ref, chain_map)
    inside = np.array([ref.atoms[k].residue_key in pocket.residues for k in corr.ref_index], dtype=bool)
    if len(inside) == 0:
        return corr.pred_index, corr.ref_index
    return corr.pred_index[inside], corr.ref_index[inside]


def align_pocket_detailed(
    pred: Structure, ref: Structure, pocket: PocketSelection, chain_map: ChainMap | None
) -> PocketAlignment:
    pi, ri = pocket_correspondence(pred, ref, pocket, chain_map)
    if len(pi) < 3:
        raise PocketError(f"only {len(pi)} matched pocket heavy atoms; need at least 3")
    P, Q = pred.coords[pi], ref.coords[ri]
    transform, after = kabsch(P, Q)
    before = float(np.sqrt(np.mean(np.sum((P - Q) ** 2, axis=1))))
    return PocketAlignment(transform, before, after, len(pi))


def align_pocket(pred: Structure, ref: Structure, pocket: PocketSelection, chain_map: ChainMap | None) -> RigidTransform:
    """Superpose the prediction onto the reference using matched pocket atoms.

    Apply the returned transform to the whole predicted complex.
    """
    return align_pocket_detailed(pred, ref, pocket, chain_map).transform
