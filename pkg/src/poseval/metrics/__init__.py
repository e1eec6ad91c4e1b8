"""Structural metrics: RMSD variants, lDDT, lDDT-PLI, pockets and chain mapping."""

from .chains import ChainMap, lcs_length, map_chains, match_atoms, optimal_assignment, sequence_identity
from .lddt import PLI_CROSS_RADIUS, LddtParams, lddt, lddt_coords, lddt_pli, lddt_pli_coords
from .pocket import POCKET_CUTOFF, PocketAlignment, PocketSelection, align_pocket, align_pocket_detailed, select_pocket
from .rmsd import SymmetryRMSD, centroid_rmsd, rmsd, rmsd_symmetry_corrected
from .scores import ComplexScore, FragmentAssignment, FragmentScore, assign_fragments

__all__ = [
    "ChainMap",
    "ComplexScore",
    "FragmentAssignment",
    "FragmentScore",
    "LddtParams",
    "PLI_CROSS_RADIUS",
    "POCKET_CUTOFF",
    "PocketAlignment",
    "PocketSelection",
    "SymmetryRMSD",
    "align_pocket",
    "align_pocket_detailed",
    "assign_fragments",
    "centroid_rmsd",
    "lcs_length",
    "lddt",
    "lddt_coords",
    "lddt_pli",
    "lddt_pli_coords",
    "map_chains",
    "match_atoms",
    "optimal_assignment",
    "rmsd",
    "rmsd_symmetry_corrected",
    "select_pocket",
    "sequence_identity",
]
