"""Parser for the SMILES subset used by ligand templates.

Supported: organic-subset atoms, bracket atoms with hydrogen count and
charge, branches, ring closures (digits and %nn), bond symbols ``- = # :``
and ``.`` separated fragments. Stereochemistry and isotopes are rejected so
that they can never be silently dropped.
"""

from __future__ import annotations

from ..elements import DEFAULT_VALENCES, normalize_element
from ..errors import ParseError, UnknownElementError, UnsupportedTokenError
from .types import AROMATIC, DOUBLE, SINGLE, TRIPLE, Edge, MoleculeGraph, Node

_ORGANIC = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
_AROMATIC_ORGANIC = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
_BOND_SYMBOLS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC}


class _Atom:
    __slots__ = ("element", "charge", "aromatic", "hcount", "bracket")

    def __init__(self, element, charge=0, aromatic=False, hcount=None, bracket=False):
        self.element = element
        self.charge = charge
        self.aromatic = aromatic
        self.hcount = hcount
        self.bracket = bracket


def _parse_bracket(body: str, pos: int) -> _Atom:
    """Parse the inside of ``[...]``; ``pos`` is the offset of '[' for errors."""
    i = 0
    if body[:1].isdigit():
        raise UnsupportedTokenError(f"isotope in bracket atom [{body}] at offset {pos}")
    if "@" in body:
        raise UnsupportedTokenError(f"stereo '@' in bracket atom [{body}] at offset {pos}")
    if ":" in body:
        raise UnsupportedTokenError(f"atom class in bracket atom [{body}] at offset {pos}")
    aromatic = False
    if body[:2] in ("se", "as"):
        element, aromatic, i = body[:2].capitalize(), True, 2
    elif body[:1] in _AROMATIC_ORGANIC:
        element, aromatic, i = _AROMATIC_ORGANIC[body[0]], True, 1
    else:
        if not body[:1].isupper():
            raise ParseError(f"bad bracket atom [{body}] at offset {pos}")
        sym = body[0]
        if body[1:2].islower():
            sym += body[1]
        try:
            element = normalize_element(sym)
        except UnknownElementError:
            if len(sym) == 2:
                element = normalize_element(sym[0])
                sym = sym[0]
            else:
                raise ParseError(f"unknown element in [{body}] at offset {pos}") from None
        i = len(sym)
    hcount = 0
    if body[i : i + 1] == "H":
        i += 1
        digits = ""
        while body[i : i + 1].isdigit():
            digits += body[i]
            i += 1
        hcount = int(digits) if digits else 1
    charge = 0
    if body[i : i + 1] in ("+", "-"):
        sign = 1 if body[i] == "+" else -1
        i += 1
        if body[i : i + 1].isdigit():
            digits = ""
            while body[i : i + 1].isdigit():
                digits += body[i]
                i += 1
            charge = sign * int(digits)
        else:
            charge = sign
            while body[i : i + 1] == ("+" if sign > 0 else "-"):
                charge += sign
                i += 1
    if i != len(body):
        raise ParseError(f"unparsed text {body[i:]!r} in bracket atom [{body}] at offset {pos}")
    return _Atom(element, charge, aromatic, hcount, bracket=True)


def _implicit_h(atom: _Atom, bond_sum: int, n_aromatic_bonds: int) -> int:
    if atom.bracket:
        return atom.hcount or 0
    valences = DEFAULT_VALENCES.get(atom.element)
    if not valences:
        return 0
    used = bond_sum
    if atom.aromatic and atom.element in ("C", "N", "B", "P") and n_aromatic_bonds:
        # one pi electron is shared with the ring
        used += 1
        if used > valences[0]:
            return 0
    for v in valences:
        if v >= used:
            return v - used
    return 0


def parse_smiles(s: str) -> MoleculeGraph:
    """Parse a SMILES string into a coordinate-free MoleculeGraph.

    Leading/trailing whitespace is ignored and anything after the first
    internal whitespace is treated as a title. Implicit hydrogens are counted
    in ``implicit_hydrogens`` and never materialised as nodes.

    Raises:
        ParseError: unbalanced branches, unclosed rings, unknown tokens.
        UnsupportedTokenError: stereo markers, isotopes, directional bonds.
    """
    text = s.strip().split(None, 1)[0] if s.strip() else ""
    if not text:
        raise ParseError("empty SMILES")
    atoms: list[_Atom] = []
    bonds: dict[tuple[int, int], int] = {}
    stack: list[int] = []
    rings: dict[int, tuple[int, int | None, int]] = {}
    prev: int | None = None
    pending: int | None = None
    i = 0

    def add_bond(a: int, b: int, order: int | None, pos: int):
        key = (min(a, b), max(a, b))
        if a == b or key in bonds:
            raise ParseError(f"invalid or duplicate bond between atoms {a} and {b} at offset {pos}")
        if order is None:
            order = AROMATIC if atoms[a].aromatic and atoms[b].aromatic else SINGLE
        bonds[key] = order

    while i < len(text):
        ch = text[i]
        if ch in "@/\\":
            raise UnsupportedTokenError(f"stereo token {ch!r} at offset {i}")
        if ch == "(":
            if prev is None:
                raise ParseError(f"branch opened before any atom at offset {i}")
            stack.append(prev)
            i += 1
            continue
        if ch == ")":
            if not stack:
                raise ParseError(f"unbalanced ')' at offset {i}")
            if pending is not None:
                raise ParseError(f"dangling bond symbol before ')' at offset {i}")
            prev = stack.pop()
            i += 1
            continue
        if ch in _BOND_SYMBOLS:
            if pending is not None:
                raise ParseError(f"two consecutive bond symbols at offset {i}")
            pending = _BOND_SYMBOLS[ch]
            i += 1
            continue
        if ch == ".":
            if pending is not None or stack:
                raise ParseError(f"misplaced '.' at offset {i}")
            prev = None
            i += 1
            continue
        if ch.isdigit() or ch == "%":
            if prev is None:
                raise ParseError(f"ring bond digit before any atom at offset {i}")
            if ch == "%":
                num_text = text[i + 1 : i + 3]
                if len(num_text) != 2 or not num_text.isdigit():
                    raise ParseError(f"malformed %nn ring label at offset {i}")
                num, width = int(num_text), 3
            else:
                num, width = int(ch), 1
            if num in rings:
                other, order, _ = rings.pop(num)
                if order is not None and pending is not None and order != pending:
                    raise ParseError(f"conflicting ring-bond orders for label {num} at offset {i}")
                add_bond(other, prev, pending if pending is not None else order, i)
            else:
                rings[num] = (prev, pending, i)
            pending = None
            i += width
            continue
        # atoms
        if ch == "[":
            close = text.find("]", i)
            if close < 0:
                raise ParseError(f"unterminated bracket atom at offset {i}")
            atom = _parse_bracket(text[i + 1 : close], i)
            width = close - i + 1
        elif text[i : i + 2] in ("Cl", "Br"):
            atom, width = _Atom(text[i : i + 2]), 2
        elif ch in _ORGANIC:
            atom, width = _Atom(ch), 1
        elif ch in _AROMATIC_ORGANIC:
            atom, width = _Atom(_AROMATIC_ORGANIC[ch], aromatic=True), 1
        elif ch == "*":
            raise UnsupportedTokenError(f"wildcard atom at offset {i}")
        else:
            raise ParseError(f"unexpected character {ch!r} at offset {i}")
        atoms.append(atom)
        idx = len(atoms) - 1
        if prev is not None:
            add_bond(prev, idx, pending, i)
        elif pending is not None:
            raise ParseError(f"bond symbol with no preceding atom at offset {i}")
        pending = None
        prev = idx
        i += width

    if stack:
        raise ParseError("unbalanced '(' in SMILES")
    if rings:
        labels = ", ".join(str(k) for k in sorted(rings))
        raise ParseError(f"unclosed ring bond(s): {labels}")
    if pending is not None:
        raise ParseError("SMILES ends with a bond symbol")

    bond_sum = [0] * len(atoms)
    n_arom = [0] * len(atoms)
    for (a, b), order in bonds.items():
        for k in (a, b):
            if order == AROMATIC:
                bond_sum[k] += 1
                n_arom[k] += 1
            else:
                bond_sum[k] += order
    hydrogens = tuple(_implicit_h(a, bond_sum[k], n_arom[k]) for k, a in enumerate(atoms))
    nodes = tuple(Node(a.element, a.charge, a.aromatic) for a in atoms)
    edges = tuple(Edge(a, b, o) for (a, b), o in sorted(bonds.items()))
    graph = MoleculeGraph(nodes, edges, None, name=text, bond_orders_known=True, implicit_hydrogens=hydrogens)
    try:
        graph.check_valence()
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return graph
