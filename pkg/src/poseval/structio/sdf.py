"""MDL V2000 molfile / SD file reader and writer."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..elements import normalize_element
from ..errors import ParseError, UnknownElementError, UnsupportedFormatError
from .types import AROMATIC, BOND_ORDERS, Edge, MoleculeGraph, Node

# atom-block charge codes (columns 37-39)
_CHARGE_CODES = {0: 0, 1: 3, 2: 2, 3: 1, 4: 0, 5: -1, 6: -2, 7: -3}


def _records(text: str):
    """Yield (first_line_number, lines) for each $$$$-separated record."""
    block: list[str] = []
    start = 1
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip() == "$$$$":
            if any(l.strip() for l in block):
                yield start, block
            block = []
            start = lineno + 1
            continue
        block.append(line)
    if any(l.strip() for l in block):
        yield start, block


def _int_field(text: str, lineno: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"non-numeric {what} field {text!r}", lineno) from None


def _parse_record(start: int, lines: list[str]) -> MoleculeGraph:
    if len(lines) < 4:
        raise ParseError("record shorter than the 4-line molfile header", start)
    name = lines[0].strip()
    counts_no = start + 3
    counts = lines[3]
    if "V3000" in counts:
        raise UnsupportedFormatError("V3000 connection tables are not supported", counts_no)
    n_atoms = _int_field(counts[0:3], counts_no, "atom count")
    n_bonds = _int_field(counts[3:6], counts_no, "bond count")

    body = lines[4:]
    end = next((k for k, l in enumerate(body) if l.startswith("M  END")), len(body))
    table = body[:end]
    # count lines that look like atom/bond entries before any property line
    n_table = next((k for k, l in enumerate(table) if l.startswith(("M  ", "A  ", "V  ", "G  ", "S  "))), len(table))
    if n_table < n_atoms + n_bonds:
        raise ParseError(
            f"header declares {n_atoms} atoms and {n_bonds} bonds but only {n_table} table lines follow",
            counts_no,
        )

    elements: list[str] = []
    charges: list[int] = []
    coords = np.zeros((n_atoms, 3))
    for k in range(n_atoms):
        lineno = counts_no + 1 + k
        line = table[k]
        try:
            coords[k] = (float(line[0:10]), float(line[10:20]), float(line[20:30]))
        except ValueError:
            raise ParseError(f"non-numeric coordinate in atom line {line!r}", lineno) from None
        symbol = line[31:34].strip()
        try:
            elements.append(normalize_element(symbol))
        except UnknownElementError as exc:
            raise ParseError(str(exc), lineno) from None
        code = _int_field(line[36:39], lineno, "charge") if line[36:39].strip() else 0
        charges.append(_CHARGE_CODES.get(code, 0))

    edges: list[Edge] = []
    for k in range(n_bonds):
        lineno = counts_no + 1 + n_atoms + k
        line = table[n_atoms + k]
        i = _int_field(line[0:3], lineno, "bond atom") - 1
        j = _int_field(line[3:6], lineno, "bond atom") - 1
        order = _int_field(line[6:9], lineno, "bond type")
        if not (0 <= i < n_atoms and 0 <= j < n_atoms):
            raise ParseError(f"bond references atom outside 1..{n_atoms}", lineno)
        if order not in BOND_ORDERS:
            raise UnsupportedFormatError(f"unsupported bond type {order}", lineno)
        edges.append(Edge(i, j, order))

    chg_seen = False
    for k, line in enumerate(table[n_table:], start=counts_no + 1 + n_table):
        if line.startswith("M  CHG"):
            if not chg_seen:
                # M  CHG supersedes every atom-block charge
                charges = [0] * n_atoms
                chg_seen = True
            fields = line[6:].split()
            n = _int_field(fields[0], k, "M  CHG count") if fields else 0
            if len(fields) < 1 + 2 * n:
                raise ParseError("truncated M  CHG entry", k)
            for p in range(n):
                idx = _int_field(fields[1 + 2 * p], k, "M  CHG atom") - 1
                if not 0 <= idx < n_atoms:
                    raise ParseError(f"M  CHG references atom {idx + 1}", k)
                charges[idx] = _int_field(fields[2 + 2 * p], k, "M  CHG value")

    aromatic = [False] * n_atoms
    for i, j, order in edges:
        if order == AROMATIC:
            aromatic[i] = aromatic[j] = True
    nodes = tuple(Node(e, c, a) for e, c, a in zip(elements, charges, aromatic))
    try:
        graph = MoleculeGraph(nodes, tuple(edges), coords, name=name, bond_orders_known=True)
        graph.check_valence()
    except ValueError as exc:
        raise ParseError(str(exc), start) from None
    return graph


def parse_sdf(text: str) -> list[MoleculeGraph]:
    """Parse every V2000 record of an SD file.

    Raises:
        ParseError: count mismatch or malformed line.
        UnsupportedFormatError: a V3000 record.
    """
    graphs = [_parse_record(start, lines) for start, lines in _records(text)]
    if not graphs:
        raise ParseError("no molfile records found")
    return graphs


def read_sdf(path: str | Path) -> list[MoleculeGraph]:
    return parse_sdf(Path(path).read_text())


def write_sdf(graphs: list[MoleculeGraph]) -> str:
    out = []
    for g in graphs:
        coords = g.coords if g.coords is not None else np.zeros((len(g), 3))
        out.append(g.name)
        out.append("  poseval")
        out.append("")
        out.append(f"{len(g.nodes):3d}{len(g.edges):3d}  0  0  0  0  0  0  0  0999 V2000")
        for (x, y, z), node in zip(coords, g.nodes):
            out.append(f"{x:10.4f}{y:10.4f}{z:10.4f} {node.element:<3} 0  0  0  0  0  0  0  0  0  0  0  0")
        for i, j, order in g.edges:
            out.append(f"{i + 1:3d}{j + 1:3d}{order:3d}  0")
        charged = [(k + 1, n.formal_charge) for k, n in enumerate(g.nodes) if n.formal_charge]
        for start in range(0, len(charged), 8):
            chunk = charged[start : start + 8]
            out.append(f"M  CHG{len(chunk):3d}" + "".join(f" {a:3d} {c:3d}" for a, c in chunk))
        out.append("M  END")
        out.append("$$$$")
    return "\n".join(out) + "\n"
