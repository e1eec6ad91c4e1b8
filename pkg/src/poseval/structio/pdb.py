"""Fixed-column PDB reader and writer (ATOM/HETATM records, first model only)."""

from __future__ import annotations

import re
from pathlib import Path

from ..elements import normalize_element
from ..errors import EmptyStructureError, ParseError, UnknownElementError
from .types import Atom, Structure

KEEP_ALTLOCS = frozenset({" ", "A"})

_CHARGE_RE = re.compile(r"^([0-9])([+-])$|^([+-])([0-9])$")


def _parse_charge(field: str, lineno: int) -> int:
    field = field.strip()
    if not field:
        return 0
    m = _CHARGE_RE.match(field)
    if not m:
        raise ParseError(f"malformed charge field {field!r}", lineno)
    digit = m.group(1) or m.group(4)
    sign = m.group(2) or m.group(3)
    return int(digit) * (1 if sign == "+" else -1)


def _element_from_name(name: str, resname: str, is_hetero: bool) -> str:
    letters = "".join(ch for ch in name if ch.isalpha())
    if not letters:
        raise UnknownElementError(name, "element in atom name")
    if is_hetero and len(letters) >= 2 and letters[:2].upper() == resname.strip().upper()[:2]:
        # single-atom ions such as ZN, MG, CL
        try:
            return normalize_element(letters[:2])
        except UnknownElementError:
            pass
    return normalize_element(letters[0])


def _parse_atom_line(line: str, lineno: int) -> tuple[Atom, str]:
    if len(line) < 54:
        raise ParseError(f"record too short ({len(line)} columns, need 54)", lineno)
    record = line[:6].strip()
    try:
        serial = int(line[6:11]) if line[6:11].strip() else 0
    except ValueError:
        serial = 0  # hybrid-36 serials; the serial is not used downstream
    name = line[12:16].strip()
    altloc = line[16]
    resname = line[17:20].strip()
    chain_id = line[21].strip() or "A"
    try:
        resseq = int(line[22:26])
    except ValueError:
        raise ParseError(f"non-numeric residue number {line[22:26]!r}", lineno) from None
    icode = line[26].strip()
    try:
        coords = (float(line[30:38]), float(line[38:46]), float(line[46:54]))
    except ValueError:
        raise ParseError(f"non-numeric coordinate field in {line[30:54]!r}", lineno) from None
    if not all(c == c and abs(c) != float("inf") for c in coords):
        raise ParseError("non-finite coordinate", lineno)
    is_hetero = record == "HETATM"
    element_field = line[76:78].strip() if len(line) >= 78 else ""
    try:
        if element_field:
            element = normalize_element(element_field)
        else:
            element = _element_from_name(name, resname, is_hetero)
    except UnknownElementError as exc:
        raise ParseError(str(exc), lineno) from None
    charge = _parse_charge(line[78:80], lineno) if len(line) >= 79 else 0
    atom = Atom(
        element=element,
        name=name,
        coords=coords,
        chain_id=chain_id,
        residue_seq=resseq,
        residue_name=resname,
        formal_charge=charge,
        is_hetero=is_hetero,
        insertion_code=icode,
        serial=serial,
    )
    return atom, altloc


def parse_pdb(text: str) -> Structure:
    """Parse PDB text into a Structure holding the first model.

    Alternate locations other than blank or 'A' are dropped. Hydrogens are
    kept; callers filter with ``Structure.heavy()``.

    Raises:
        ParseError: a fixed-column record is malformed (message carries the line).
        EmptyStructureError: no heavy atoms were found.
    """
    atoms: list[Atom] = []
    seen: dict[tuple, int] = {}
    title = ""
    in_model = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r\n")
        record = line[:6].strip()
        if record == "MODEL":
            if in_model or atoms:
                break
            in_model = True
            continue
        if record == "ENDMDL":
            break
        if record in ("END",):
            break
        if record in ("TITLE", "HEADER") and not title:
            title = line[10:].strip()
            continue
        if record not in ("ATOM", "HETATM"):
            continue
        atom, altloc = _parse_atom_line(line, lineno)
        if altloc not in KEEP_ALTLOCS:
            continue
        key = atom.atom_key
        if key in seen:
            raise ParseError(
                f"duplicate atom {atom.name} in residue {atom.chain_id}{atom.residue_seq}{atom.insertion_code} "
                f"(first seen on line {seen[key]})",
                lineno,
            )
        seen[key] = lineno
        atoms.append(atom)
    if not any(not a.is_hydrogen for a in atoms):
        raise EmptyStructureError("no heavy atoms in PDB input")
    return Structure(tuple(atoms), title=title, model_index=1)


def read_pdb(path: str | Path) -> Structure:
    return parse_pdb(Path(path).read_text())


def _format_name(name: str, element: str) -> str:
    if len(name) >= 4:
        return name[:4]
    # one-letter elements start in column 14 by convention
    if len(element) == 1:
        return f" {name:<3}"
    return f"{name:<4}"


def _format_charge(charge: int) -> str:
    if charge == 0:
        return "  "
    return f"{abs(charge)}{'+' if charge > 0 else '-'}"


def write_pdb(structure: Structure) -> str:
    lines = []
    if structure.title:
        lines.append(f"TITLE     {structure.title}")
    for serial, a in enumerate(structure.atoms, start=1):
        record = "HETATM" if a.is_hetero else "ATOM  "
        x, y, z = a.coords
        lines.append(
            f"{record}{serial % 100000:5d} {_format_name(a.name, a.element)} {a.residue_name:>3} "
            f"{a.chain_id[:1]}{a.residue_seq:4d}{(a.insertion_code or ' ')[:1]}   "
            f"{x:8.3f}{y:8.3f}{z:8.3f}{1.0:6.2f}{0.0:6.2f}          "
            f"{a.element.upper():>2}{_format_charge(a.formal_charge)}"
        )
    lines.append("END")
    return "\n".join(lines) + "\n"
