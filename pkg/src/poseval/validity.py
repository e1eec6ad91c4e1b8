"""Geometric pose-validity checks (a subset of the PoseBusters battery).

Every check works on heavy atoms and returns a ``CheckResult`` carrying the
worst offender, so a failing pose can be diagnosed from the report alone.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .elements import covalent_radius, is_metal, vdw_radius
from .errors import GeometryError
from .geometry import cross_pairs
from .molgraph import is_aromatic_ring, is_saturated_ring, rings
from .structio.types import MoleculeGraph, Structure

CHECKS = ("bond_lengths", "internal_clash", "ring_flatness", "protein_ligand_clash", "inter_ligand_clash")
DISABLED_CHECKS = ("internal_energy",)


@dataclass(frozen=True)
class ValidityParams:
    bond_tolerance: float = 0.25  # relative to the covalent-radius sum
    internal_clash_ratio: float = 0.8
    cross_clash_ratio: float = 0.75
    aromatic_planarity: float = 0.25  # max out-of-plane deviation, A
    aliphatic_flat_tolerance: float = 0.05
    metal_coordination_distance: float = 2.8  # metal-N/O/S pairs below this are not clashes

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    worst: dict | None = None  # description of the worst offending atom pair or ring
    error: str | None = None

    def __bool__(self) -> bool:
        return self.passed


def _heavy(g: MoleculeGraph) -> MoleculeGraph:
    h = g.heavy()
    if h.coords is None:
        raise GeometryError(f"ligand {g.name!r} has no coordinates")
    return h


def check_bond_lengths(g: MoleculeGraph, params: ValidityParams = ValidityParams()) -> CheckResult:
    """Every bond within +/- tolerance of the covalent-radius sum."""
    h = _heavy(g)
    worst, worst_dev = None, -1.0
    for i, j, _ in h.edges:
        nominal = covalent_radius(h.nodes[i].element) + covalent_radius(h.nodes[j].element)
        d = float(np.linalg.norm(h.coords[i] - h.coords[j]))
        dev = abs(d / nominal - 1.0)
        if dev > worst_dev:
            worst_dev = dev
            worst = {"atoms": [i, j], "distance": d, "nominal": nominal}
    return CheckResult(worst_dev <= params.bond_tolerance, worst)


def _topological_distance_le2(h: MoleculeGraph) -> set[tuple[int, int]]:
    close = set()
    adj = h.adjacency
    for i in range(len(h)):
        for j in adj[i]:
            close.add((min(i, j), max(i, j)))
            for k in adj[j]:
                if k != i:
                    close.add((min(i, k), max(i, k)))
    return close


def check_internal_clash(g: MoleculeGraph, params: ValidityParams = ValidityParams()) -> CheckResult:
    """Atoms more than two bonds apart are at least ratio x covalent sum apart."""
    h = _heavy(g)
    n = len(h)
    if n < 2:
        return CheckResult(True)
    radii = np.array([covalent_radius(e) for e in h.elements])
    skip = _topological_distance_le2(h)
    diff = h.coords[:, None, :] - h.coords[None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=2))
    worst, worst_ratio = None, np.inf
    for i, j in combinations(range(n), 2):
        if (i, j) in skip:
            continue
        ratio = dist[i, j] / (radii[i] + radii[j])
        if ratio < worst_ratio:
            worst_ratio = ratio
            worst = {"atoms": [i, j], "distance": float(dist[i, j]), "ratio": float(ratio)}
    return CheckResult(bool(worst_ratio >= params.internal_clash_ratio), worst)


def _plane_deviation(xyz: np.ndarray) -> float:
    """Largest distance of a ring atom from the best-fit plane of the other ring atoms.

    Leaving the atom out keeps a single puckered atom from dragging the plane
    toward itself, so its displacement is measured at full size.
    """
    worst = 0.0
    for k in range(len(xyz)):
        rest = np.delete(xyz, k, axis=0)
        c = rest.mean(axis=0)
        normal = np.linalg.svd(rest - c)[2][2]
        worst = max(worst, abs(float(np.dot(xyz[k] - c, normal))))
    return worst


def check_ring_flatness(g: MoleculeGraph, params: ValidityParams = ValidityParams()) -> CheckResult:
    """Aromatic rings must be flat; saturated 5/6-rings must not be perfectly flat."""
    h = _heavy(g)
    for ring in rings(h):
        dev = _plane_deviation(h.coords[ring])
        if is_aromatic_ring(h, ring):
            if dev > params.aromatic_planarity:
                return CheckResult(False, {"ring": list(ring), "kind": "aromatic", "deviation": dev})
        elif len(ring) in (5, 6) and is_saturated_ring(h, ring):
            if dev <= params.aliphatic_flat_tolerance:
                return CheckResult(False, {"ring": list(ring), "kind": "flat_aliphatic", "deviation": dev})
    return CheckResult(True)


def _coordination(e1: str, e2: str) -> bool:
    return (is_metal(e1) and e2 in ("N", "O", "S")) or (is_metal(e2) and e1 in ("N", "O", "S"))


def _cross_clash(
    xa: np.ndarray, ea: Sequence[str], xb: np.ndarray, eb: Sequence[str], params: ValidityParams
) -> tuple[float, dict | None]:
    """Smallest dist / (vdW_a + vdW_b) over close pairs, ignoring metal coordination."""
    if len(xa) == 0 or len(xb) == 0:
        return np.inf, None
    ra = np.array([vdw_radius(e) for e in ea])
    rb = np.array([vdw_radius(e) for e in eb])
    reach = params.cross_clash_ratio * float(ra.max() + rb.max())
    ia, ib, d = cross_pairs(xa, xb, reach)
    worst, worst_ratio = None, np.inf
    for a, b, dist in zip(ia, ib, d):
        if dist <= params.metal_coordination_distance and _coordination(ea[a], eb[b]):
            continue
        ratio = dist / (ra[a] + rb[b])
        if ratio < worst_ratio:
            worst_ratio = float(ratio)
            worst = {"atoms": [int(a), int(b)], "distance": float(dist), "ratio": worst_ratio}
    return worst_ratio, worst


def check_protein_ligand_clash(
    protein: Structure, ligand: MoleculeGraph, params: ValidityParams = ValidityParams()
) -> CheckResult:
    """No ligand-protein heavy-atom pair closer than ratio x vdW sum."""
    h = _heavy(ligand)
    p = protein.heavy()
    ratio, worst = _cross_clash(h.coords, h.elements, p.coords if len(p) else np.zeros((0, 3)), p.elements, params)
    return CheckResult(bool(ratio >= params.cross_clash_ratio), worst)


def check_inter_ligand_clash(ligands: Sequence[MoleculeGraph], params: ValidityParams = ValidityParams()) -> CheckResult:
    """Pairwise ligand-ligand version of the protein-ligand clash rule."""
    hs = [_heavy(g) for g in ligands]
    for a, b in combinations(range(len(hs)), 2):
        ratio, worst = _cross_clash(hs[a].coords, hs[a].elements, hs[b].coords, hs[b].elements, params)
        if ratio < params.cross_clash_ratio:
            return CheckResult(False, {"ligands": [a, b], **(worst or {})})
    return CheckResult(True)


@dataclass
class ValidityReport:
    per_check: dict[str, bool]
    overall: bool
    enabled: list[str]
    disabled: list[str] = field(default_factory=lambda: list(DISABLED_CHECKS))
    details: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_check": dict(self.per_check),
            "overall": self.overall,
            "enabled": list(self.enabled),
            "disabled": list(self.disabled),
            "details": self.details,
            "errors": dict(self.errors),
        }


def _all(results: list[CheckResult]) -> CheckResult:
    for r in results:
        if not r.passed:
            return r
    return CheckResult(True)


def pb_valid(
    ligands: MoleculeGraph | Sequence[MoleculeGraph],
    protein: Structure | None = None,
    params: ValidityParams = ValidityParams(),
) -> ValidityReport:
    """Run every enabled check; overall is their conjunction.

    The protein check is enabled only when ``protein`` is given. A check that
    raises is recorded as failed with its error message.
    """
    if isinstance(ligands, MoleculeGraph):
        ligands = [ligands]
    ligands = list(ligands)
    runs = {
        "bond_lengths": lambda: _all([check_bond_lengths(g, params) for g in ligands]),
        "internal_clash": lambda: _all([check_internal_clash(g, params) for g in ligands]),
        "ring_flatness": lambda: _all([check_ring_flatness(g, params) for g in ligands]),
        "protein_ligand_clash": lambda: _all([check_protein_ligand_clash(protein, g, params) for g in ligands]),
        "inter_ligand_clash": lambda: check_inter_ligand_clash(ligands, params),
    }
    enabled = [c for c in CHECKS if c != "protein_ligand_clash" or protein is not None]
    per_check, details, errors = {}, {}, {}
    for name in enabled:
        try:
            res = runs[name]()
        except Exception as exc:  # a broken input fails the check, never the batch
            res = CheckResult(False, None, f"{type(exc).__name__}: {exc}")
        per_check[name] = res.passed
        if res.worst is not None and not res.passed:
            details[name] = res.worst
        if res.error:
            errors[name] = res.error
    return ValidityReport(per_check, all(per_check.values()), enabled, details=details, errors=errors)
