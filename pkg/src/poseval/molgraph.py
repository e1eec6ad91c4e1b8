"""Molecule-graph algorithms: bond perception, template matching, automorphisms.

Matching and automorphism search share one backtracking engine. Nodes are
first coloured by colour refinement (1-WL) over the disjoint union of the two
graphs; any isomorphism must preserve those colours, which prunes almost all
candidates for real ligands. Search order is chosen so that each new node is
adjacent to as many already-placed nodes as possible.

All indices in AtomMapping and AutomorphismSet refer to the *heavy-atom*
subgraph (``MoleculeGraph.heavy()``), never to hydrogen-bearing node lists.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .elements import covalent_radius, is_metal
from .errors import MappingError, MappingPreconditionError, SearchBudgetExceeded
from .structio.types import AROMATIC, Atom, Edge, MoleculeGraph, Node

BOND_TOLERANCE = 0.45
AUTOMORPHISM_CAP = 10_000
NODE_BUDGET = 2_000_000


@dataclass(frozen=True)
class AtomMapping:
    """Pairs of (template heavy index, target heavy index)."""

    pairs: tuple[tuple[int, int], ...]

    def as_array(self) -> np.ndarray:
        """target index for each template index, ordered by template index."""
        out = np.empty(len(self.pairs), dtype=int)
        for t, c in self.pairs:
            out[t] = c
        return out

    def inverse(self) -> "AtomMapping":
        return AtomMapping(tuple(sorted((c, t) for t, c in self.pairs)))

    def compose(self, other: "AtomMapping") -> "AtomMapping":
        """self: A->B, other: B->C gives A->C."""
        m = dict(other.pairs)
        return AtomMapping(tuple((a, m[b]) for a, b in self.pairs))


@dataclass(frozen=True)
class AutomorphismSet:
    perms: np.ndarray  # (k, n) int array; row 0 is the identity
    truncated: bool

    def __len__(self) -> int:
        return len(self.perms)


# --------------------------------------------------------------------------
# bond perception


def perceive_bonds(ligand_atoms: Sequence[Atom], tolerance: float = BOND_TOLERANCE) -> MoleculeGraph:
    """Connect atoms closer than the sum of covalent radii plus ``tolerance``.

    Every bond gets order 1 and the graph is flagged ``bond_orders_known=False``.
    Metal-metal contacts are never bonded.
    """
    atoms = list(ligand_atoms)
    if not atoms:
        raise ValueError("perceive_bonds needs at least one atom")
    radii = np.array([covalent_radius(a.element) for a in atoms])
    coords = np.array([a.coords for a in atoms], dtype=float)
    if not np.all(np.isfinite(coords)):
        raise ValueError("non-finite ligand coordinates")
    edges = []
    if len(atoms) > 1:
        reach = 2 * radii.max() + tolerance
        for i, j in sorted(cKDTree(coords).query_pairs(reach)):
            if is_metal(atoms[i].element) and is_metal(atoms[j].element):
                continue
            d = float(np.linalg.norm(coords[i] - coords[j]))
            if d <= radii[i] + radii[j] + tolerance:
                edges.append(Edge(i, j, 1))
    nodes = tuple(Node(a.element, a.formal_charge, False) for a in atoms)
    name = atoms[0].residue_name if atoms else ""
    return MoleculeGraph(nodes, tuple(edges), coords, name=name, bond_orders_known=False)


# --------------------------------------------------------------------------
# labels and colour refinement


def _node_labels(g: MoleculeGraph, charges: bool) -> list[tuple]:
    return [(n.element, n.formal_charge if charges else 0) for n in g.nodes]


def _edge_label(order: int, orders: bool) -> int:
    return order if orders else 1


def _refine(graphs: Sequence[MoleculeGraph], labels: Sequence[list[tuple]], orders: bool) -> list[list[int]]:
    """Joint 1-WL colour refinement; colours are comparable across graphs."""
    colours = [[(lab, len(g.adjacency[i])) for i, lab in enumerate(labs)] for g, labs in zip(graphs, labels)]
    n_classes = -1
    while True:
        palette = {c: k for k, c in enumerate(sorted({c for cs in colours for c in cs}, key=repr))}
        ints = [[palette[c] for c in cs] for cs in colours]
        if len(palette) == n_classes:
            return ints
        n_classes = len(palette)
        colours = [
            [
                (ints_g[i], tuple(sorted((ints_g[j], _edge_label(o, orders)) for j, o in g.adjacency[i].items())))
                for i in range(len(g))
            ]
            for g, ints_g in zip(graphs, ints)
        ]


def _search_order(g: MoleculeGraph, colours: list[int]) -> list[int]:
    class_size = Counter(colours)
    order: list[int] = []
    placed: set[int] = set()
    links = [0] * len(g)
    remaining = set(range(len(g)))
    while remaining:
        nxt = min(remaining, key=lambda v: (-links[v], class_size[colours[v]], v))
        order.append(nxt)
        placed.add(nxt)
        remaining.discard(nxt)
        for nb in g.adjacency[nxt]:
            links[nb] += 1
    return order


class _Matcher:
    def __init__(self, a: MoleculeGraph, b: MoleculeGraph, charges: bool, orders: bool, budget: int):
        self.a, self.b = a, b
        self.orders = orders
        colours = _refine([a, b], [_node_labels(a, charges), _node_labels(b, charges)], orders)
        self.ca, self.cb = colours
        self.order = _search_order(a, self.ca)
        self.by_colour: dict[int, list[int]] = {}
        for v, c in enumerate(self.cb):
            self.by_colour.setdefault(c, []).append(v)
        self.budget = budget
        self.steps = 0

    def feasible(self) -> bool:
        return Counter(self.ca) == Counter(self.cb)

    def run(self) -> Iterator[list[int]]:
        n = len(self.a)
        mapping = [-1] * n
        used = [False] * len(self.b)
        adj_a, adj_b = self.a.adjacency, self.b.adjacency
        order = self.order

        def candidates(depth: int) -> list[int]:
            u = order[depth]
            placed_nbs = [(mapping[w], o) for w, o in adj_a[u].items() if mapping[w] >= 0]
            if placed_nbs:
                anchor = placed_nbs[0][0]
                pool = [v for v in adj_b[anchor] if self.cb[v] == self.ca[u]]
            else:
                pool = self.by_colour.get(self.ca[u], [])
            out = []
            for v in pool:
                if used[v]:
                    continue
                ok = True
                for mv, o in placed_nbs:
                    ob = adj_b[v].get(mv)
                    if ob is None or _edge_label(ob, self.orders) != _edge_label(o, self.orders):
                        ok = False
                        break
                if not ok:
                    continue
                # no extra edges to already-placed nodes
                n_placed_b = sum(1 for w in adj_b[v] if used[w])
                if n_placed_b != len(placed_nbs):
                    continue
                out.append(v)
            # trying v == u first makes a graph match itself by the identity
            out.sort(key=lambda v: (v != u, v))
            return out

        stack = [candidates(0)] if n else []
        depth = 0
        if n == 0:
            return
        while stack:
            self.steps += 1
            if self.steps > self.budget:
                raise SearchBudgetExceeded(f"graph search exceeded {self.budget} nodes")
            cands = stack[-1]
            u = order[depth]
            if mapping[u] >= 0:
                used[mapping[u]] = False
                mapping[u] = -1
            if not cands:
                stack.pop()
                depth -= 1
                continue
            v = cands.pop(0)
            mapping[u] = v
            used[v] = True
            if depth == n - 1:
                yield list(mapping)
                continue
            depth += 1
            stack.append(candidates(depth))


def _labels_from_flags(g: MoleculeGraph, use_bond_orders: bool | None) -> bool:
    if use_bond_orders is None:
        return g.bond_orders_known
    return use_bond_orders and g.bond_orders_known


def match_template(
    template: MoleculeGraph,
    target: MoleculeGraph,
    *,
    use_charges: bool = True,
    use_bond_orders: bool | None = None,
    budget: int = NODE_BUDGET,
) -> AtomMapping:
    """Find a label-preserving isomorphism between the heavy-atom graphs.

    By default bond orders take part in the labels when both graphs know them
    (``use_bond_orders=None``); pass False to match on elements, charges and
    connectivity only.

    Raises:
        MappingPreconditionError: heavy-atom counts or element multisets differ.
        MappingError: no isomorphism exists.
        SearchBudgetExceeded: the search visited more than ``budget`` nodes.
    """
    a, b = template.heavy(), target.heavy()
    if len(a) != len(b):
        raise MappingPreconditionError(f"heavy-atom counts differ: {len(a)} vs {len(b)}")
    if Counter(a.elements) != Counter(b.elements):
        raise MappingPreconditionError(f"element multisets differ: {a.formula()} vs {b.formula()}")
    orders = _labels_from_flags(a, use_bond_orders) and _labels_from_flags(b, use_bond_orders)
    matcher = _Matcher(a, b, use_charges, orders, budget)
    if not matcher.feasible():
        raise MappingError("graphs are not isomorphic (colour classes differ)")
    for mapping in matcher.run():
        return AtomMapping(tuple((t, c) for t, c in enumerate(mapping)))
    raise MappingError("graphs are not isomorphic")


def automorphisms(
    g: MoleculeGraph,
    cap: int = AUTOMORPHISM_CAP,
    *,
    use_charges: bool = True,
    use_bond_orders: bool | None = None,
    budget: int = NODE_BUDGET,
) -> AutomorphismSet:
    """Enumerate label-preserving automorphisms of the heavy-atom graph.

    Bond orders participate only when the graph knows them (never for
    perceived graphs). Enumeration stops at ``cap`` permutations, or when the
    node budget runs out, with ``truncated=True``.
    """
    h = g.heavy()
    n = len(h)
    if n == 0:
        raise ValueError("graph has no heavy atoms")
    identity = list(range(n))
    perms = [identity]
    truncated = False
    if cap > 1:
        orders = _labels_from_flags(h, use_bond_orders)
        matcher = _Matcher(h, h, use_charges, orders, budget)
        try:
            for mapping in matcher.run():
                if mapping == identity:
                    continue
                if len(perms) >= cap:
                    truncated = True
                    break
                perms.append(mapping)
        except SearchBudgetExceeded:
            truncated = True
    elif n > 1:
        # cap of one: only the identity is kept; flag unless provably asymmetric
        orders = _labels_from_flags(h, use_bond_orders)
        matcher = _Matcher(h, h, use_charges, orders, budget)
        try:
            truncated = any(m != identity for m in _take(matcher.run(), 2))
        except SearchBudgetExceeded:
            truncated = True
    return AutomorphismSet(np.array(perms, dtype=int), truncated)


def _take(it, k):
    for n, x in enumerate(it):
        if n >= k:
            return
        yield x


# --------------------------------------------------------------------------
# chemistry helpers used by interaction typing and validity checks


def hydrogen_counts(g: MoleculeGraph) -> list[int]:
    """Total hydrogens per node.

    Graphs with any explicit hydrogen node are taken as fully protonated.
    SMILES graphs carry implicit counts. Otherwise counts are estimated from
    the lowest standard valence compatible with the bond sum (aromatic bonds
    count 1.5); for perceived graphs every bond is single, so the estimate is
    an upper bound.
    """
    from .elements import DEFAULT_VALENCES

    has_explicit = any(n.element == "H" for n in g.nodes)
    out = []
    for i, node in enumerate(g.nodes):
        explicit = sum(1 for j in g.adjacency[i] if g.nodes[j].element == "H")
        if node.element == "H" or has_explicit:
            out.append(0 if node.element == "H" else explicit)
        elif g.implicit_hydrogens is not None:
            out.append(g.implicit_hydrogens[i])
        else:
            out.append(_estimate_implicit(node, g.valence(i), DEFAULT_VALENCES.get(node.element, ())))
    return out


def _estimate_implicit(node: Node, bond_sum: float, valences: tuple[int, ...]) -> int:
    if not valences:
        return 0
    q = node.formal_charge
    if node.element == "B":
        targets = [v - q for v in valences]
    elif node.element == "C":
        targets = [v - abs(q) for v in valences]
    else:
        targets = [v + q for v in valences]
    used = int(np.ceil(bond_sum - 1e-9))
    for t in targets:
        if t >= used:
            return t - used
    return 0


def rings(g: MoleculeGraph, max_size: int = 8) -> list[list[int]]:
    """Smallest-set-of-rings style cycle list (node indices in ring order).

    Each ring is the shortest cycle through one edge; duplicates removed.
    Rings longer than ``max_size`` are ignored.
    """
    adj = g.adjacency
    found: dict[frozenset, list[int]] = {}
    for a, b, _ in g.edges:
        # shortest path from a to b avoiding the direct edge
        prev = {a: -1}
        queue = [a]
        done = False
        for u in queue:
            for w in sorted(adj[u]):
                if u == a and w == b:
                    continue
                if w in prev:
                    continue
                prev[w] = u
                if w == b:
                    done = True
                    break
                queue.append(w)
            if done:
                break
        if not done:
            continue
        path = [b]
        while path[-1] != a:
            path.append(prev[path[-1]])
        if len(path) > max_size:
            continue
        key = frozenset(path)
        if key not in found:
            found[key] = path
    return sorted(found.values(), key=lambda r: (len(r), sorted(r)))


def is_aromatic_ring(g: MoleculeGraph, ring: Sequence[int]) -> bool:
    """Aromatic if flagged (aromatic atoms/bonds) or a Kekule 6-ring."""
    n = len(ring)
    orders = [g.bond_order(ring[k], ring[(k + 1) % n]) for k in range(n)]
    if all(o == AROMATIC for o in orders) or all(g.nodes[i].aromatic for i in ring):
        return True
    if not g.bond_orders_known or n != 6:
        return False
    return orders in ([1, 2] * 3, [2, 1] * 3)


def is_saturated_ring(g: MoleculeGraph, ring: Sequence[int]) -> bool:
    """True when every ring atom has only single bonds (needs known orders)."""
    if not g.bond_orders_known:
        return False
    for i in ring:
        node = g.nodes[i]
        if node.aromatic:
            return False
        if any(o != 1 for o in g.adjacency[i].values()):
            return False
    return True
