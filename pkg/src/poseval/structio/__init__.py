"""Readers and writers for PDB, SDF (V2000) and a SMILES subset."""

from pathlib import Path

from ..errors import ParseError
from .pdb import parse_pdb, read_pdb, write_pdb
from .sdf import parse_sdf, read_sdf, write_sdf
from .smiles import parse_smiles
from .types import AROMATIC, DOUBLE, SINGLE, TRIPLE, Atom, Edge, MoleculeGraph, Node, Structure, graph_from_parts

__all__ = [
    "AROMATIC",
    "DOUBLE",
    "SINGLE",
    "TRIPLE",
    "Atom",
    "Edge",
    "MoleculeGraph",
    "Node",
    "Structure",
    "graph_from_parts",
    "parse_pdb",
    "parse_sdf",
    "parse_smiles",
    "read_pdb",
    "read_sdf",
    "write_pdb",
    "write_sdf",
    "read_ligands",
]


def read_ligands(path: str | Path) -> list:
    """Load ligands from an SDF (one graph per record) or a PDB file.

    PDB ligands carry no bond block; each non-polymer residue is returned
    as a Structure and the caller perceives bonds.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in (".sdf", ".mol", ".sd"):
        return read_sdf(path)
    if suffix in (".pdb", ".ent"):
        structure = read_pdb(path)
        groups = structure.ligand_groups()
        return groups or [structure]
    raise ParseError(f"unrecognised ligand file extension {path.suffix!r} for {path}")
