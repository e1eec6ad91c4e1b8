import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poseval.structio import Atom, Structure, graph_from_parts
from poseval.validity import (
    DISABLED_CHECKS,
    ValidityParams,
    check_bond_lengths,
    check_inter_ligand_clash,
    check_internal_clash,
    check_protein_ligand_clash,
    check_ring_flatness,
    pb_valid,
)

import builders as b

seeds = st.integers(0, 2**32 - 1)


def _cc(d):
    return graph_from_parts(["C", "C"], [(0, 1, 1)], np.array([[0, 0, 0], [d, 0, 0]]))


def _protein_atom(xyz, element="C"):
    return Structure((Atom(element, "CB", tuple(map(float, xyz)), "A", 1, "ALA"),))


def test_bond_length_examples():
    assert check_bond_lengths(_cc(1.52)).passed
    r = check_bond_lengths(_cc(2.50))
    assert not r.passed and r.worst["atoms"] == [0, 1]
    assert check_bond_lengths(b.ion("Zn", (0, 0, 0))).passed


def test_internal_clash_examples():
    chain = graph_from_parts(
        ["C"] * 4,
        [(0, 1, 1), (1, 2, 1), (2, 3, 1)],
        np.array([[0, 0, 0], [1.52, 0, 0], [2.03, 1.43, 0], [3.55, 1.43, 0]]),
    )
    assert check_internal_clash(chain).passed
    two = graph_from_parts(["C", "C"], [], np.array([[0, 0, 0], [0.8, 0, 0]]))
    assert not check_internal_clash(two).passed
    # just above 0.8 x 1.52 = 1.216
    assert check_internal_clash(graph_from_parts(["C", "C"], [], np.array([[0, 0, 0], [1.22, 0, 0]]))).passed
    assert check_internal_clash(_cc(1.52)).passed


def test_protein_ligand_clash_examples():
    lig = b.ion("C", (0, 0, 0), charge=0)
    assert not check_protein_ligand_clash(_protein_atom((0.5, 0, 0)), lig).passed
    assert check_protein_ligand_clash(_protein_atom((3.4, 0, 0)), lig).passed
    # 0.75 x 3.4 = 2.55 is the boundary
    assert check_protein_ligand_clash(_protein_atom((2.56, 0, 0)), lig).passed
    r = check_protein_ligand_clash(_protein_atom((2.54, 0, 0)), lig)
    assert not r.passed and r.worst["ratio"] == pytest.approx(2.54 / 3.4)
    assert check_protein_ligand_clash(_protein_atom((15, 0, 0)), lig).passed


def test_metal_coordination_is_not_a_clash():
    zn = b.ion("Zn", (0, 0, 0))
    assert check_protein_ligand_clash(_protein_atom((2.1, 0, 0), "O"), zn).passed
    assert not check_protein_ligand_clash(_protein_atom((1.2, 0, 0), "C"), zn).passed


def test_ring_flatness_examples():
    assert check_ring_flatness(b.benzene()).passed
    r = check_ring_flatness(b.benzene(lift=0.5))
    assert not r.passed
    assert r.worst["deviation"] == pytest.approx(0.5)
    assert not check_ring_flatness(b.cyclohexane(planar=True)).passed
    assert check_ring_flatness(b.cyclohexane()).passed


def test_inter_ligand_examples():
    assert check_inter_ligand_clash([b.ion("Zn", (0, 0, 0)), b.ion("Zn", (5, 0, 0))]).passed
    lig = b.benzoate()
    assert not check_inter_ligand_clash([lig, lig.with_coords(lig.coords + [0.3, 0, 0])]).passed
    assert check_inter_ligand_clash([lig]).passed


def test_pb_valid_overall_and_subset():
    rep = pb_valid(b.benzoate(), b.pocket_protein())
    assert rep.overall
    assert rep.disabled == list(DISABLED_CHECKS) == ["internal_energy"]
    assert "protein_ligand_clash" in rep.enabled
    bad = pb_valid(b.benzene(lift=0.5))
    assert not bad.overall
    assert bad.per_check == {"bond_lengths": True, "internal_clash": True, "ring_flatness": False, "inter_ligand_clash": True}


def test_pb_valid_records_errors():
    nocoords = graph_from_parts(["C", "C"], [(0, 1, 1)], None, name="X")
    rep = pb_valid(nocoords)
    assert not rep.overall
    assert set(rep.errors) == set(rep.enabled)
    assert "GeometryError" in rep.errors["bond_lengths"]


def test_pb_valid_deterministic():
    args = ([b.benzoate(), b.ion("Zn", (5, 5, 5))], b.pocket_protein())
    a = json.dumps(pb_valid(*args).to_dict(), sort_keys=True)
    assert a == json.dumps(pb_valid(*args).to_dict(), sort_keys=True)


@given(seeds)
def test_checks_invariant_under_rigid_motion(seed):
    rng = np.random.default_rng(seed)
    lig = b.benzoate()
    lig = lig.with_coords(lig.coords + rng.normal(scale=0.25, size=lig.coords.shape))
    prot = b.pocket_protein()
    R, t = b.rotation(rng.normal(size=3), float(rng.uniform(0, 360))), rng.normal(scale=10, size=3)
    a = pb_valid(lig, prot)
    m = pb_valid(b.moved_graph(lig, R, t), b.moved_structure(prot, R, t))
    assert a.per_check == m.per_check


def _loose(p, k):
    return ValidityParams(
        bond_tolerance=p.bond_tolerance * (1 + k),
        internal_clash_ratio=p.internal_clash_ratio / (1 + k),
        cross_clash_ratio=p.cross_clash_ratio / (1 + k),
        aromatic_planarity=p.aromatic_planarity * (1 + k),
        aliphatic_flat_tolerance=p.aliphatic_flat_tolerance / (1 + k),
    )


@given(seeds, st.floats(0.05, 2.0), st.floats(0.05, 0.5))
def test_tightening_never_flips_fail_to_pass(seed, k, noise):
    rng = np.random.default_rng(seed)
    ligs = [b.benzoate(), b.cyclohexane(planar=bool(rng.integers(2)))]
    ligs = [g.with_coords(g.coords + rng.normal(scale=noise, size=g.coords.shape) + [0, 0, 2 * i]) for i, g in enumerate(ligs)]
    prot = b.pocket_protein()
    base = ValidityParams()
    tight = pb_valid(ligs, prot, base)
    loose = pb_valid(ligs, prot, _loose(base, k))
    for name, ok in tight.per_check.items():
        if ok:
            assert loose.per_check[name]
