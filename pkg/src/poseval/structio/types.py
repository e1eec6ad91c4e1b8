"""Core structural data types: atoms, structures and molecule graphs."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from ..elements import WATER_NAMES, max_valence, one_letter, parent_residue

SINGLE = 1
DOUBLE = 2
TRIPLE = 3
AROMATIC = 4

BOND_ORDERS = (SINGLE, DOUBLE, TRIPLE, AROMATIC)


@dataclass(frozen=True)
class Atom:
    element: str
    name: str
    coords: tuple[float, float, float]
    chain_id: str = "A"
    residue_seq: int = 1
    residue_name: str = "UNK"
    formal_charge: int = 0
    is_hetero: bool = False
    insertion_code: str = ""
    serial: int = 0

    @property
    def is_hydrogen(self) -> bool:
        return self.element == "H"

    @property
    def residue_key(self) -> tuple[str, int, str]:
        return (self.chain_id, self.residue_seq, self.insertion_code)

    @property
    def atom_key(self) -> tuple[str, int, str, str]:
        return (self.chain_id, self.residue_seq, self.insertion_code, self.name)


@dataclass(frozen=True, eq=False)
class Structure:
    """Ordered atom model (file order) of a protein, complex or ligand."""

    atoms: tuple[Atom, ...]
    title: str = ""
    model_index: int = 1

    def __post_init__(self):
        if not isinstance(self.atoms, tuple):
            object.__setattr__(self, "atoms", tuple(self.atoms))

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    @cached_property
    def coords(self) -> np.ndarray:
        if not self.atoms:
            return np.zeros((0, 3))
        return np.array([a.coords for a in self.atoms], dtype=float)

    @cached_property
    def elements(self) -> tuple[str, ...]:
        return tuple(a.element for a in self.atoms)

    def select(self, predicate: Callable[[Atom], bool]) -> "Structure":
        return Structure(tuple(a for a in self.atoms if predicate(a)), self.title, self.model_index)

    def heavy(self) -> "Structure":
        return self.select(lambda a: not a.is_hydrogen)

    def polymer(self) -> "Structure":
        """Amino-acid atoms (standard and common modified residues)."""
        return self.select(lambda a: parent_residue(a.residue_name) is not None)

    def chain_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for a in self.atoms:
            seen.setdefault(a.chain_id, None)
        return list(seen)

    def residues(self) -> list[tuple[tuple[str, int, str], str, list[int]]]:
        """(residue_key, residue_name, atom indices) in file order."""
        out: list[tuple[tuple[str, int, str], str, list[int]]] = []
        index: dict[tuple[str, int, str], int] = {}
        for i, a in enumerate(self.atoms):
            key = a.residue_key
            if key not in index:
                index[key] = len(out)
                out.append((key, a.residue_name, []))
            out[index[key]][2].append(i)
        return out

    def sequence(self, chain_id: str) -> str:
        return "".join(
            one_letter(name)
            for key, name, _ in self.residues()
            if key[0] == chain_id and parent_residue(name) is not None
        )

    def ligand_groups(self) -> list["Structure"]:
        """Non-polymer, non-water residues as separate structures, file order."""
        groups = []
        for key, name, idx in self.residues():
            if parent_residue(name) is not None or name in WATER_NAMES:
                continue
            groups.append(Structure(tuple(self.atoms[i] for i in idx), title=f"{name}:{key[0]}{key[1]}"))
        return groups

    def with_coords(self, coords: np.ndarray) -> "Structure":
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (len(self.atoms), 3):
            raise ValueError(f"expected coords of shape ({len(self.atoms)}, 3), got {coords.shape}")
        atoms = tuple(
            replace(a, coords=(float(x), float(y), float(z))) for a, (x, y, z) in zip(self.atoms, coords)
        )
        return Structure(atoms, self.title, self.model_index)


class Node(NamedTuple):
    element: str
    formal_charge: int = 0
    aromatic: bool = False


class Edge(NamedTuple):
    i: int
    j: int
    order: int = SINGLE


@dataclass(frozen=True, eq=False)
class MoleculeGraph:
    """Ligand as a labelled graph, optionally with 3D coordinates.

    ``bond_orders_known`` is False for graphs whose bonds were perceived from
    distances (every order is then 1 and carries no information).
    ``implicit_hydrogens`` is only set by the SMILES parser.
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...] = ()
    coords: np.ndarray | None = None
    name: str = ""
    bond_orders_known: bool = True
    implicit_hydrogens: tuple[int, ...] | None = None

    def __post_init__(self):
        nodes = tuple(Node(*n) for n in self.nodes)
        edges = []
        seen = set()
        for e in self.edges:
            i, j, order = Edge(*e)
            if i == j:
                raise ValueError(f"self-loop on atom {i}")
            if not (0 <= i < len(nodes) and 0 <= j < len(nodes)):
                raise ValueError(f"edge ({i}, {j}) references a missing atom")
            if order not in BOND_ORDERS:
                raise ValueError(f"unsupported bond order {order!r}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            edges.append(Edge(key[0], key[1], order))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(edges))
        if self.coords is not None:
            coords = np.asarray(self.coords, dtype=float).reshape(-1, 3)
            if len(coords) != len(nodes):
                raise ValueError(f"{len(coords)} coordinates for {len(nodes)} atoms")
            if not np.all(np.isfinite(coords)):
                raise ValueError("non-finite coordinates")
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)
        if self.implicit_hydrogens is not None:
            object.__setattr__(self, "implicit_hydrogens", tuple(self.implicit_hydrogens))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def elements(self) -> tuple[str, ...]:
        return tuple(n.element for n in self.nodes)

    @cached_property
    def adjacency(self) -> tuple[dict[int, int], ...]:
        adj: list[dict[int, int]] = [{} for _ in self.nodes]
        for i, j, order in self.edges:
            adj[i][j] = order
            adj[j][i] = order
        return tuple(adj)

    def neighbors(self, i: int) -> list[int]:
        return sorted(self.adjacency[i])

    def bond_order(self, i: int, j: int) -> int | None:
        return self.adjacency[i].get(j)

    @cached_property
    def heavy_indices(self) -> tuple[int, ...]:
        return tuple(i for i, n in enumerate(self.nodes) if n.element != "H")

    @property
    def n_heavy(self) -> int:
        return len(self.heavy_indices)

    def heavy(self) -> "MoleculeGraph":
        """Heavy-atom subgraph; removed hydrogens become implicit counts."""
        keep = self.heavy_indices
        if len(keep) == len(self.nodes):
            return self
        remap = {old: new for new, old in enumerate(keep)}
        edges = [Edge(remap[i], remap[j], o) for i, j, o in self.edges if i in remap and j in remap]
        base = self.implicit_hydrogens
        hcount = []
        for old in keep:
            explicit = sum(1 for nb in self.adjacency[old] if self.nodes[nb].element == "H")
            hcount.append(explicit + (base[old] if base is not None else 0))
        coords = None if self.coords is None else self.coords[list(keep)]
        return MoleculeGraph(
            tuple(self.nodes[i] for i in keep),
            tuple(edges),
            coords,
            self.name,
            self.bond_orders_known,
            tuple(hcount) if (base is not None or any(hcount)) else None,
        )

    def formula(self) -> str:
        """Heavy-atom formula in Hill-like order, e.g. 'C6N1O2'."""
        counts = Counter(n.element for n in self.nodes if n.element != "H")
        order = sorted(counts, key=lambda e: (e != "C", e))
        return "".join(f"{e}{counts[e]}" for e in order)

    def with_coords(self, coords: np.ndarray | None) -> "MoleculeGraph":
        return replace(self, coords=coords)

    def valence(self, i: int) -> float:
        return sum(1.5 if o == AROMATIC else float(o) for o in self.adjacency[i].values())

    def check_valence(self) -> None:
        """Raise ValueError if any atom exceeds its element's valence allowance."""
        for i, node in enumerate(self.nodes):
            limit = max_valence(node.element) + abs(node.formal_charge)
            # An aromatic atom's fractional bond sum rounds down in Kekule form.
            if int(self.valence(i)) > limit:
                raise ValueError(
                    f"atom {i} ({node.element}) has valence {self.valence(i):g} > {limit}"
                )


def graph_from_parts(
    elements: Sequence[str],
    edges: Iterable[tuple[int, int, int]] = (),
    coords: np.ndarray | None = None,
    charges: Sequence[int] | None = None,
    aromatic: Sequence[bool] | None = None,
    **kwargs,
) -> MoleculeGraph:
    """Convenience constructor used by tests and fixture builders."""
    n = len(elements)
    charges = charges if charges is not None else [0] * n
    aromatic = aromatic if aromatic is not None else [False] * n
    nodes = tuple(Node(e, int(c), bool(a)) for e, c, a in zip(elements, charges, aromatic))
    return MoleculeGraph(nodes, tuple(Edge(*e) for e in edges), coords, **kwargs)
