"""Geometric protein-ligand interaction detection.

Protein atoms are typed from residue/atom-name tables; ligand atoms from the
molecular graph (elements, charges, hydrogen counts, rings). One record is
emitted per (ligand, residue instance, interaction type).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..elements import HALOGENS, is_metal, parent_residue, vdw_radius
from ..errors import GeometryError
from ..geometry import cross_pairs
from ..molgraph import hydrogen_counts, is_aromatic_ring, rings
from ..structio.types import MoleculeGraph, Structure
from .types import InteractionRecord, InteractionType, residue_type

IT = InteractionType


@dataclass(frozen=True)
class InteractionParams:
    hbond_distance: float = 3.5
    hbond_min_angle: float = 130.0  # D-H...A, only checked when hydrogens are present
    hydrophobic_distance: float = 4.5
    vdw_tolerance: float = 0.5
    salt_bridge_distance: float = 4.5
    pi_stacking_distance: float = 5.5
    pi_parallel_max_angle: float = 30.0
    pi_tshape_min_angle: float = 60.0
    pi_cation_distance: float = 4.5
    metal_distance: float = 2.8

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# protein typing (keyed by parent residue and atom name)

_BACKBONE_DONORS = {"N"}
_BACKBONE_ACCEPTORS = {"O", "OXT"}
PROTEIN_DONORS = {
    "ARG": {"NE", "NH1", "NH2"},
    "ASN": {"ND2"},
    "GLN": {"NE2"},
    "HIS": {"ND1", "NE2"},
    "LYS": {"NZ"},
    "SER": {"OG"},
    "THR": {"OG1"},
    "TYR": {"OH"},
    "TRP": {"NE1"},
    "CYS": {"SG"},
}
PROTEIN_ACCEPTORS = {
    "ASP": {"OD1", "OD2"},
    "GLU": {"OE1", "OE2"},
    "ASN": {"OD1"},
    "GLN": {"OE1"},
    "HIS": {"ND1", "NE2"},
    "SER": {"OG"},
    "THR": {"OG1"},
    "TYR": {"OH"},
    "MET": {"SD"},
}
# carbons bonded to N or O are polar and never hydrophobic
_POLAR_CARBONS = {
    "*": {"C", "CA"},
    "SER": {"CB"},
    "THR": {"CB"},
    "TYR": {"CZ"},
    "ASP": {"CG"},
    "GLU": {"CD"},
    "ASN": {"CG"},
    "GLN": {"CD"},
    "LYS": {"CE"},
    "ARG": {"CD", "CZ"},
    "HIS": {"CG", "CD2", "CE1"},
    "TRP": {"CD1", "CE2"},
    "PRO": {"CD"},
}
_APOLAR_SULFUR = {"MET": {"SD", "SE"}}
PROTEIN_CATIONS = {"ARG": ("NE", "NH1", "NH2"), "LYS": ("NZ",)}
PROTEIN_ANIONS = {"ASP": ("OD1", "OD2"), "GLU": ("OE1", "OE2")}
PROTEIN_RINGS = {
    "PHE": [("CG", "CD1", "CD2", "CE1", "CE2", "CZ")],
    "TYR": [("CG", "CD1", "CD2", "CE1", "CE2", "CZ")],
    "TRP": [("CD2", "CE2", "CE3", "CZ2", "CZ3", "CH2"), ("CG", "CD1", "NE1", "CE2", "CD2")],
    "HIS": [("CG", "ND1", "CD2", "CE1", "NE2")],
}


def _protein_atom_types(res: str, name: str, element: str) -> set[str]:
    t = set()
    if name in _BACKBONE_DONORS and res != "PRO" or name in PROTEIN_DONORS.get(res, ()):
        t.add("donor")
    if name in _BACKBONE_ACCEPTORS or name in PROTEIN_ACCEPTORS.get(res, ()):
        t.add("acceptor")
    if element == "C" and name not in _POLAR_CARBONS["*"] and name not in _POLAR_CARBONS.get(res, ()):
        t.add("hydrophobic")
    if element in ("S", "Se") and name in _APOLAR_SULFUR.get(res, ()):
        t.add("hydrophobic")
    return t


# --------------------------------------------------------------------------
# ligand typing


@dataclass(frozen=True)
class _LigandFeatures:
    donors: list[int]
    acceptors: list[int]
    hydrophobic: list[int]
    metals: list[int]
    anions: list[list[int]]
    cations: list[list[int]]
    rings: list[list[int]]


def _ligand_features(g: MoleculeGraph) -> _LigandFeatures:
    hcount = hydrogen_counts(g)
    adj = g.adjacency
    nodes = g.nodes
    donors, acceptors, hydrophobic, metals = [], [], [], []
    for i, node in enumerate(nodes):
        e, q = node.element, node.formal_charge
        if e == "H":
            continue
        heavy_nb = [j for j in adj[i] if nodes[j].element != "H"]
        if is_metal(e):
            metals.append(i)
            continue
        if e in ("N", "O", "S") and hcount[i] > 0:
            donors.append(i)
        if e == "O" and q <= 0:
            acceptors.append(i)
        elif e == "N" and q <= 0 and hcount[i] == 0:
            # pyridine-like or nitrile/imine nitrogens; amine/amide N with three heavy
            # neighbours and no unsaturation is not an acceptor
            unsaturated = node.aromatic or any(o != 1 for o in adj[i].values())
            if len(heavy_nb) < 3 and (unsaturated or not g.bond_orders_known):
                acceptors.append(i)
        if e == "C" and not any(nodes[j].element in ("N", "O", "F") for j in adj[i]):
            hydrophobic.append(i)
        elif e == "S" and hcount[i] == 0 and len(heavy_nb) == 2 and q == 0:
            hydrophobic.append(i)
        elif e in HALOGENS - {"F"}:
            hydrophobic.append(i)

    def terminal(j, elem):
        return nodes[j].element == elem and sum(1 for k in adj[j] if nodes[k].element != "H") == 1

    anions: list[list[int]] = []
    cations: list[list[int]] = []
    covered: set[int] = set()
    # carboxylate, phosphate (>= 2 terminal O) and sulfonate/sulfate (>= 3)
    for c, node in enumerate(nodes):
        if node.element not in ("C", "P", "S"):
            continue
        oxy = sorted(j for j in adj[c] if terminal(j, "O"))
        if node.element == "C" and len(oxy) == 2 and not any(hcount[j] for j in oxy):
            anions.append(oxy)
            covered.update(oxy)
        elif (node.element == "P" and len(oxy) >= 2) or (node.element == "S" and len(oxy) >= 3):
            anions.append(oxy)
            covered.update(oxy)
    # amidinium / guanidinium: carbon with >= 2 nitrogen neighbours, one positively charged
    for c, node in enumerate(nodes):
        if node.element != "C":
            continue
        nit = sorted(j for j in adj[c] if nodes[j].element == "N")
        if len(nit) >= 2 and any(nodes[j].formal_charge > 0 for j in nit):
            cations.append(nit)
            covered.update(nit)
    for i, node in enumerate(nodes):
        if i in covered or node.element == "H" or is_metal(node.element):
            continue
        if node.formal_charge < 0:
            anions.append([i])
        elif node.formal_charge > 0 and node.element in ("N", "P", "S"):
            cations.append([i])
    aromatic_rings = [r for r in rings(g) if is_aromatic_ring(g, r)]
    return _LigandFeatures(donors, acceptors, hydrophobic, metals, anions, cations, aromatic_rings)


def _ring_geometry(xyz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = xyz.mean(axis=0)
    _, _, vt = np.linalg.svd(xyz - c)
    return c, vt[2]


def _plane_angle(n1: np.ndarray, n2: np.ndarray) -> float:
    cos = abs(float(np.dot(n1, n2)))
    return float(np.degrees(np.arccos(min(1.0, cos))))


def _angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Angle at ``b`` in degrees."""
    u, v = a - b, c - b
    cos = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))


class _Protein:
    """Heavy-atom view of the protein with typing and per-residue groups."""

    def __init__(self, protein: Structure):
        poly = protein.polymer()
        self.heavy_idx = [i for i, a in enumerate(poly.atoms) if not a.is_hydrogen]
        self.atoms = [poly.atoms[i] for i in self.heavy_idx]
        self.xyz = poly.coords[self.heavy_idx] if self.heavy_idx else np.zeros((0, 3))
        self.types = [
            _protein_atom_types(parent_residue(a.residue_name) or "", a.name, a.element) for a in self.atoms
        ]
        # hydrogens per residue, used for donor angles
        self.res_h: dict[tuple, np.ndarray] = {}
        hs: dict[tuple, list] = {}
        for a in poly.atoms:
            if a.is_hydrogen:
                hs.setdefault(a.residue_key, []).append(a.coords)
        self.res_h = {k: np.array(v, dtype=float) for k, v in hs.items()}
        self.residues: dict[tuple, dict[str, int]] = {}
        self.resname: dict[tuple, str] = {}
        for k, a in enumerate(self.atoms):
            self.residues.setdefault(a.residue_key, {})[a.name] = k
            self.resname[a.residue_key] = parent_residue(a.residue_name) or a.residue_name

    def groups(self, table: dict) -> list[tuple[tuple, np.ndarray]]:
        """(residue key, centroid) for every complete named group of ``table``."""
        out = []
        for key, names in self.residues.items():
            want = table.get(self.resname[key])
            if not want:
                continue
            idx = [names[n] for n in want if n in names]
            if idx:
                out.append((key, self.xyz[idx].mean(axis=0)))
        return out

    def rings(self) -> list[tuple[tuple, np.ndarray, np.ndarray]]:
        out = []
        for key, names in self.residues.items():
            for ring in PROTEIN_RINGS.get(self.resname[key], ()):
                if all(n in names for n in ring):
                    c, normal = _ring_geometry(self.xyz[[names[n] for n in ring]])
                    out.append((key, c, normal))
        return out


def _hbond_ok(donor_xyz, h_xyz, acceptor_xyz, min_angle) -> bool:
    """True if no hydrogens are known, or some hydrogen satisfies the angle."""
    if h_xyz is None or len(h_xyz) == 0:
        return True
    return any(_angle(donor_xyz, h, acceptor_xyz) >= min_angle for h in h_xyz)


def detect_interactions(
    protein: Structure,
    ligand: MoleculeGraph,
    ligand_id: str,
    params: InteractionParams = InteractionParams(),
) -> list[InteractionRecord]:
    """Interactions between one ligand and the protein's amino-acid residues.

    Returns records sorted by (residue, interaction type), one per residue
    instance and type. VdWContact is only reported for residues with no other
    interaction.
    """
    if ligand.coords is None:
        raise GeometryError(f"ligand {ligand_id!r} has no coordinates")
    P = _Protein(protein)
    L = _ligand_features(ligand)
    lx = ligand.coords
    found: dict[tuple, dict[InteractionType, float]] = {}

    def hit(res_key, itype, dist):
        slot = found.setdefault(res_key, {})
        slot[itype] = min(dist, slot.get(itype, np.inf))

    heavy = [i for i in ligand.heavy_indices]
    if len(P.atoms) == 0 or not heavy:
        return []
    reach = max(params.hbond_distance, params.hydrophobic_distance, params.metal_distance, 4.0)
    li, pj, dist = cross_pairs(lx[heavy], P.xyz, reach)
    li = np.asarray(heavy, dtype=int)[li] if len(li) else li
    donors, acceptors, hyd, metals = set(L.donors), set(L.acceptors), set(L.hydrophobic), set(L.metals)
    lig_h = {
        i: lx[[j for j in ligand.adjacency[i] if ligand.nodes[j].element == "H"]] for i in L.donors
    }
    for a, b, d in zip(li, pj, dist):
        atom = P.atoms[b]
        key = atom.residue_key
        ptypes = P.types[b]
        if d <= params.hbond_distance:
            if a in donors and "acceptor" in ptypes:
                if _hbond_ok(lx[a], lig_h.get(a), P.xyz[b], params.hbond_min_angle):
                    hit(key, IT.HBondDonor, d)
            if a in acceptors and "donor" in ptypes:
                hp = P.res_h.get(key)
                if hp is not None:
                    # hydrogens of this donor atom only
                    hp = hp[np.linalg.norm(hp - P.xyz[b], axis=1) <= 1.3]
                if _hbond_ok(P.xyz[b], hp, lx[a], params.hbond_min_angle):
                    hit(key, IT.HBondAcceptor, d)
        if d <= params.hydrophobic_distance and a in hyd and "hydrophobic" in ptypes:
            hit(key, IT.Hydrophobic, d)
        if d <= params.metal_distance and a in metals and atom.element in ("N", "O", "S"):
            hit(key, IT.MetalCoordination, d)

    # charged groups
    p_cat = P.groups(PROTEIN_CATIONS)
    p_an = P.groups(PROTEIN_ANIONS)
    for group in L.anions:
        c = lx[group].mean(axis=0)
        for key, pc in p_cat:
            d = float(np.linalg.norm(c - pc))
            if d <= params.salt_bridge_distance:
                hit(key, IT.SaltBridgeAnionic, d)
    for group in L.cations:
        c = lx[group].mean(axis=0)
        for key, pc in p_an:
            d = float(np.linalg.norm(c - pc))
            if d <= params.salt_bridge_distance:
                hit(key, IT.SaltBridgeCationic, d)

    # aromatic rings
    p_rings = P.rings()
    l_rings = [_ring_geometry(lx[r]) for r in L.rings]
    for lc, ln in l_rings:
        for key, pc, pn in p_rings:
            d = float(np.linalg.norm(lc - pc))
            if d <= params.pi_stacking_distance:
                ang = _plane_angle(ln, pn)
                if ang <= params.pi_parallel_max_angle or ang >= params.pi_tshape_min_angle:
                    hit(key, IT.PiStacking, d)
        # ligand ring to protein cation
        for key, pc in P.groups({"LYS": ("NZ",), "ARG": ("CZ",)}):
            d = float(np.linalg.norm(lc - pc))
            if d <= params.pi_cation_distance:
                hit(key, IT.PiCation, d)
    # ligand cation to protein ring
    for group in L.cations:
        c = lx[group].mean(axis=0)
        for key, pc, _ in p_rings:
            d = float(np.linalg.norm(c - pc))
            if d <= params.pi_cation_distance:
                hit(key, IT.PiCation, d)

    # van der Waals contacts for residues without a specific interaction
    lvdw = np.array([vdw_radius(ligand.nodes[i].element) for i in heavy])
    pvdw = np.array([vdw_radius(a.element) for a in P.atoms])
    vreach = float(lvdw.max() + pvdw.max() + params.vdw_tolerance)
    vi, vj, vd = cross_pairs(lx[heavy], P.xyz, vreach)
    ok = vd <= lvdw[vi] + pvdw[vj] + params.vdw_tolerance
    for a, b, d in zip(vi[ok], vj[ok], vd[ok]):
        key = P.atoms[b].residue_key
        if key in found and any(t != IT.VdWContact for t in found[key]):
            continue
        hit(key, IT.VdWContact, float(d))

    records = []
    for key in sorted(found):
        rtype = residue_type(P.resname[key])
        for itype in sorted(found[key], key=lambda t: t.value):
            records.append(InteractionRecord(ligand_id, rtype, itype, key, round(float(found[key][itype]), 6)))
    return records
