"""Periodic-table subset and residue tables used across the package.

Covalent radii are the Cordero et al. (2008) single-bond values (sp3 carbon,
low-spin values for transition metals). Van der Waals radii are Bondi's, with
Alvarez (2013) values for metals Bondi does not list.
"""

from __future__ import annotations

from .errors import UnknownElementError

COVALENT_RADII: dict[str, float] = {
    "H": 0.31,
    "B": 0.84,
    "C": 0.76,
    "N": 0.71,
    "O": 0.66,
    "F": 0.57,
    "Si": 1.11,
    "P": 1.07,
    "S": 1.05,
    "Cl": 1.02,
    "As": 1.19,
    "Se": 1.20,
    "Br": 1.20,
    "I": 1.39,
    "Li": 1.28,
    "Na": 1.66,
    "Mg": 1.41,
    "K": 2.03,
    "Ca": 1.76,
    "Mn": 1.39,
    "Fe": 1.32,
    "Co": 1.26,
    "Ni": 1.24,
    "Cu": 1.32,
    "Zn": 1.22,
    "Cd": 1.44,
    "Hg": 1.32,
}

VDW_RADII: dict[str, float] = {
    "H": 1.20,
    "B": 1.92,
    "C": 1.70,
    "N": 1.55,
    "O": 1.52,
    "F": 1.47,
    "Si": 2.10,
    "P": 1.80,
    "S": 1.80,
    "Cl": 1.75,
    "As": 1.85,
    "Se": 1.90,
    "Br": 1.85,
    "I": 1.98,
    "Li": 1.82,
    "Na": 2.27,
    "Mg": 1.73,
    "K": 2.75,
    "Ca": 2.31,
    "Mn": 2.05,
    "Fe": 2.04,
    "Co": 2.00,
    "Ni": 1.63,
    "Cu": 1.40,
    "Zn": 1.39,
    "Cd": 1.58,
    "Hg": 1.55,
}

METALS = frozenset({"Li", "Na", "Mg", "K", "Ca", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Cd", "Hg"})
HALOGENS = frozenset({"F", "Cl", "Br", "I"})

# Highest neutral valence; charged atoms get |charge| extra.
MAX_VALENCE: dict[str, int] = {
    "H": 1,
    "B": 4,
    "C": 4,
    "N": 3,
    "O": 2,
    "F": 1,
    "Si": 4,
    "P": 5,
    "S": 6,
    "Cl": 7,
    "As": 5,
    "Se": 6,
    "Br": 7,
    "I": 7,
}
METAL_MAX_VALENCE = 8

# Allowed valences for implicit-hydrogen completion, lowest first.
DEFAULT_VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

SUPPORTED_ELEMENTS = frozenset(COVALENT_RADII)

_CANONICAL = {e.upper(): e for e in SUPPORTED_ELEMENTS}
_CANONICAL["D"] = "H"


def normalize_element(symbol: str) -> str:
    """Return the canonical capitalisation of ``symbol`` ('CL' -> 'Cl').

    Deuterium is folded into hydrogen. Raises UnknownElementError for
    anything outside the supported subset.
    """
    key = symbol.strip().upper()
    try:
        return _CANONICAL[key]
    except KeyError:
        raise UnknownElementError(symbol) from None


def covalent_radius(element: str) -> float:
    try:
        return COVALENT_RADII[element]
    except KeyError:
        raise UnknownElementError(element, "element (no covalent radius)") from None


def vdw_radius(element: str) -> float:
    try:
        return VDW_RADII[element]
    except KeyError:
        raise UnknownElementError(element, "element (no van der Waals radius)") from None


def is_metal(element: str) -> bool:
    return element in METALS


def max_valence(element: str) -> int:
    if element in METALS:
        return METAL_MAX_VALENCE
    return MAX_VALENCE[element]


AMINO_ACIDS: dict[str, str] = {
    "ALA": "A",
    "ARG": "R",
    "ASN": "N",
    "ASP": "D",
    "CYS": "C",
    "GLN": "Q",
    "GLU": "E",
    "GLY": "G",
    "HIS": "H",
    "ILE": "I",
    "LEU": "L",
    "LYS": "K",
    "MET": "M",
    "PHE": "F",
    "PRO": "P",
    "SER": "S",
    "THR": "T",
    "TRP": "W",
    "TYR": "Y",
    "VAL": "V",
}

# Common modified residues mapped onto their parent for sequence purposes.
MODIFIED_RESIDUES: dict[str, str] = {
    "MSE": "MET",
    "SEP": "SER",
    "TPO": "THR",
    "PTR": "TYR",
    "HID": "HIS",
    "HIE": "HIS",
    "HIP": "HIS",
    "HSD": "HIS",
    "HSE": "HIS",
    "CYX": "CYS",
}

WATER_NAMES = frozenset({"HOH", "WAT", "DOD", "H2O", "TIP", "TIP3", "SOL"})


def parent_residue(resname: str) -> str | None:
    """Standard parent amino acid for ``resname`` or None if not an amino acid."""
    if resname in AMINO_ACIDS:
        return resname
    return MODIFIED_RESIDUES.get(resname)


def one_letter(resname: str) -> str:
    parent = parent_residue(resname)
    return AMINO_ACIDS[parent] if parent else "X"
