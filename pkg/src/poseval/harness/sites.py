"""Group reference ligands into binding sites for docking-box preparation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..geometry import cross_pairs, min_cross_distance
from ..metrics.pocket import POCKET_CUTOFF, ligand_heavy_coords
from ..structio.types import Structure

LINK_DISTANCE = 25.0
BOX_SIZE = 25.0


@dataclass(frozen=True, eq=False)
class SiteGroup:
    members: tuple[int, ...]  # ligand indices, ascending
    center: np.ndarray
    size: float
    n_pocket_residues: int
    center_source: str  # "pocket" or "ligand" (no residue within the pocket cutoff)

    def to_dict(self) -> dict:
        return {
            "members": list(self.members),
            "center": [float(x) for x in self.center],
            "size": [self.size] * 3,
            "n_pocket_residues": self.n_pocket_residues,
            "center_source": self.center_source,
        }


def site_partition(ligand_coords: list[np.ndarray], link_distance: float = LINK_DISTANCE) -> list[tuple[int, ...]]:
    """Connected components of the 'some heavy-atom pair within link_distance' graph."""
    n = len(ligand_coords)
    if n == 0:
        raise ValueError("need at least one ligand")
    rows, cols = [], []
    for a in range(n):
        for b in range(a + 1, n):
            if min_cross_distance(ligand_coords[a], ligand_coords[b]) <= link_distance:
                rows.append(a)
                cols.append(b)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])


def group_ligand_sites(
    ref_ligands: list,
    protein: Structure,
    link_distance: float = LINK_DISTANCE,
    pocket_cutoff: float = POCKET_CUTOFF,
    box_size: float = BOX_SIZE,
) -> list[SiteGroup]:
    """Partition ligands into sites and place one cubic box per site.

    The box is centred on the heavy-atom centroid of the protein residues
    within ``pocket_cutoff`` of any member ligand. Without such residues the
    ligand heavy-atom centroid is used instead.
    """
    coords = [ligand_heavy_coords(l) for l in ref_ligands]
    poly = protein.polymer().heavy()
    out = []
    for members in site_partition(coords, link_distance):
        lig = np.vstack([coords[i] for i in members])
        keys = set()
        if len(poly):
            _, hit, _ = cross_pairs(lig, poly.coords, pocket_cutoff)
            keys = {poly.atoms[k].residue_key for k in np.unique(hit)}
        if keys:
            idx = [k for k, a in enumerate(poly.atoms) if a.residue_key in keys]
            center, source = poly.coords[idx].mean(axis=0), "pocket"
        else:
            center, source = lig.mean(axis=0), "ligand"
        out.append(SiteGroup(members, center, float(box_size), len(keys), source))
    return out
