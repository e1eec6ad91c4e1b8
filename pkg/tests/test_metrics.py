import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poseval.errors import GeometryError, PocketError
from poseval.metrics import (
    LddtParams,
    align_pocket,
    assign_fragments,
    centroid_rmsd,
    lddt,
    lddt_coords,
    lddt_pli,
    lddt_pli_coords,
    map_chains,
    rmsd,
    rmsd_symmetry_corrected,
    select_pocket,
)
from poseval.metrics.chains import optimal_assignment, sequence_identity
from poseval.molgraph import automorphisms
from poseval.structio import Atom, Structure, graph_from_parts, parse_sdf

import builders as b
from oracles import brute_assignment, isomorphism_rmsd, naive_lddt, naive_lddt_pli
from test_structio import ETHANE

seeds = st.integers(0, 2**32 - 1)


# -- RMSD ----------------------------------------------------------------------


def test_rmsd_examples():
    X = np.array([[0, 0, 0], [1, 2, 3.0]])
    assert rmsd(X, X) == 0.0
    assert rmsd([[3, 0, 0]], [[0, 0, 0]]) == pytest.approx(3.0)
    assert rmsd(X + np.array([[1, 0, 0], [0, 2, 0]]), X) == pytest.approx(np.sqrt(2.5))


def test_centroid_rmsd_examples():
    X = b.benzoate_coords()
    assert centroid_rmsd(X + [0, 1, 0], X) == pytest.approx(1.0)
    assert centroid_rmsd(X, X) == 0.0
    assert centroid_rmsd(X.mean(axis=0, keepdims=True), X) == pytest.approx(0.0, abs=1e-12)


def test_asymmetric_equals_plain():
    g = graph_from_parts(["C", "O", "N"], [(0, 1, 1), (1, 2, 1)], np.array([[0, 0, 0], [1.4, 0, 0], [2.8, 0.3, 0]]))
    moved = g.with_coords(g.coords + 0.4)
    res = rmsd_symmetry_corrected(moved, g)
    assert res.value == pytest.approx(rmsd(moved.coords, g.coords))
    assert res.naive == res.value


def test_benzene_label_rotation():
    ref = b.benzene()
    # Kekule bond orders count, so shift by two ring positions
    perm = [2, 3, 4, 5, 0, 1]
    pred = b.permuted(ref, perm)
    res = rmsd_symmetry_corrected(pred, ref)
    assert res.value == pytest.approx(0.0, abs=1e-12)
    assert res.naive > 1.0


def test_cap_one_gives_naive_and_flag():
    ref = b.benzene()
    pred = b.permuted(ref, [2, 3, 4, 5, 0, 1])
    res = rmsd_symmetry_corrected(pred, ref, cap=1)
    assert res.truncated
    assert res.value == res.naive


def test_hydrogens_do_not_change_rmsd():
    (eth,) = parse_sdf(ETHANE)
    moved = eth.with_coords(eth.coords + 0.3)
    with_h = rmsd_symmetry_corrected(moved, eth)
    heavy = rmsd_symmetry_corrected(moved.heavy(), eth.heavy())
    assert with_h.value == heavy.value
    assert centroid_rmsd(moved, eth) == centroid_rmsd(moved.heavy(), eth.heavy())


def test_pre_align_removes_rigid_motion():
    ref = b.benzoate()
    R = b.rotation((1, 1, 0), 50)
    pred = b.moved_graph(ref, R, (3, 0, 0))
    assert rmsd_symmetry_corrected(pred, ref).value > 1
    assert rmsd_symmetry_corrected(pred, ref, pre_align=True).value == pytest.approx(0, abs=1e-9)


@given(seeds)
def test_symmetry_rmsd_matches_backtracking_oracle(seed):
    rng = np.random.default_rng(seed)
    ref = b.random_molecule(rng)
    n = len(ref)
    perm = rng.permutation(n).tolist()
    pred = b.permuted(ref, perm)
    pred = pred.with_coords(pred.coords + rng.normal(scale=0.5, size=(n, 3)))
    res = rmsd_symmetry_corrected(pred, ref)
    oracle = isomorphism_rmsd(ref.elements, ref.edges, ref.coords, pred.elements, pred.edges, pred.coords)
    assert res.value == pytest.approx(oracle, abs=1e-9)
    assert res.value <= res.naive + 1e-12
    if len(automorphisms(ref)) == 1:
        assert res.value == res.naive


# -- lDDT ----------------------------------------------------------------------


def test_lddt_identity_and_total_failure():
    rng = np.random.default_rng(0)
    X = rng.uniform(0, 4, size=(12, 3))
    assert lddt_coords(X, X) == 1.0
    # scaling by 10 changes every distance by 9 d; the closest pair is > 0.5 A apart
    d = np.linalg.norm(X[:, None] - X[None], axis=2)
    assert d[np.triu_indices(12, 1)].min() > 4.5 / 9
    assert lddt_coords(X * 10, X) == 0.0


def test_lddt_three_atoms_one_perturbed():
    ref = np.array([[0, 0, 0], [3.0, 0, 0], [0, 4.0, 0]])
    pred = ref.copy()
    pred[1, 0] += 1.5  # d01: 3 -> 4.5, d12: 5 -> ~6.02
    value = lddt_coords(pred, ref, residue_ids=[0, 1, 2])
    assert value == pytest.approx(naive_lddt(pred, ref, [0, 1, 2]), abs=1e-12)
    assert 0 < value < 1


@given(seeds)
def test_lddt_matches_double_loop(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 41))
    ref = rng.uniform(0, 25, size=(n, 3))
    pred = ref + rng.normal(scale=rng.uniform(0.1, 3), size=(n, 3))
    res = rng.integers(0, max(1, n // 3), size=n)
    try:
        got = lddt_coords(pred, ref, res)
    except GeometryError:
        with pytest.raises(ZeroDivisionError):
            naive_lddt(pred, ref, res)
        return
    assert got == pytest.approx(naive_lddt(pred, ref, res), abs=1e-12)


@given(seeds)
def test_lddt_rigid_invariance(seed):
    rng = np.random.default_rng(seed)
    ref = rng.uniform(0, 12, size=(15, 3))
    pred = ref + rng.normal(scale=1, size=ref.shape)
    R = b.rotation(rng.normal(size=3), float(rng.uniform(0, 360)))
    assert lddt_coords(pred @ R.T + 7, ref) == pytest.approx(lddt_coords(pred, ref), abs=1e-12)


def test_lddt_structures_exclude_same_residue():
    prot = b.pocket_protein()
    moved = b.moved_structure(prot, b.rotation((0, 1, 0), 33), (1, 2, 3))
    assert lddt(moved, prot) == pytest.approx(1.0)


def test_lddt_params_validation():
    with pytest.raises(ValueError):
        LddtParams(thresholds=(1.0, 0.5))
    with pytest.raises(ValueError):
        LddtParams(inclusion_radius=3.0)


def test_lddt_pli_examples():
    prot = b.pocket_protein()
    lig = b.benzoate_coords()
    assert lddt_pli(prot, lig, prot, lig) == 1.0


def test_lddt_pli_shifted_out_of_pocket():
    rng = np.random.default_rng(5)
    lig = rng.uniform(-0.5, 0.5, size=(6, 3))
    # protein on the +x side only; moving the ligand 10 A towards -x stretches every
    # cross distance within 6 A by more than 5.6 A
    prot = rng.uniform(0, 5, size=(30, 3)) * [1, 1, 1] + [0.5, -2.5, -2.5]
    assert lddt_pli_coords(lig - [10, 0, 0], prot, lig, prot) == 0.0


def test_lddt_pli_one_atom_displaced():
    lig = np.array([[0, 0, 0], [1.5, 0, 0]])
    prot = np.array([[0, 3.5, 0], [1.5, -4.0, 0], [20, 0, 0]])
    moved = lig.copy()
    moved[0] += [0, 1.5, 0]
    got = lddt_pli_coords(moved, prot, lig, prot)
    assert got == pytest.approx(naive_lddt_pli(moved, prot, lig, prot), abs=1e-12)


@given(seeds)
def test_lddt_pli_cross_pair_oracle(seed):
    rng = np.random.default_rng(seed)
    lig = rng.uniform(4, 8, size=(int(rng.integers(1, 10)), 3))
    prot = rng.uniform(0, 12, size=(int(rng.integers(5, 40)), 3))
    plig = lig + rng.normal(scale=1.0, size=lig.shape)
    pprot = prot + rng.normal(scale=0.3, size=prot.shape)
    try:
        got = lddt_pli_coords(plig, pprot, lig, prot)
    except GeometryError:
        return
    assert got == pytest.approx(naive_lddt_pli(plig, pprot, lig, prot), abs=1e-12)


def test_lddt_pli_invariant_to_pre_motion_after_alignment():
    prot = b.pocket_protein()
    lig = b.benzoate_coords()
    pocket = select_pocket(prot, [lig])
    pred_lig = lig + np.array([0.3, -0.2, 0.4])
    base = lddt_pli(prot, pred_lig, prot, lig, pocket)
    R, t = b.rotation((2, 1, -1), 71), np.array([5.0, -8, 2])
    moved = b.moved_structure(prot, R, t)
    tr = align_pocket(moved, prot, pocket, None)
    again = lddt_pli(moved.with_coords(tr.apply(moved.coords)), tr.apply(pred_lig @ R.T + t), prot, lig, pocket)
    assert again == pytest.approx(base, abs=1e-9)


# -- pocket ------------------------------------------------------------------


def _single_atom_residues(distances):
    atoms = []
    for k, d in enumerate(distances):
        atoms.append(Atom("C", "CA", (float(d), 0.0, 0.0), "A", k + 1, "ALA"))
    return Structure(tuple(atoms))


def test_pocket_boundary():
    prot = _single_atom_residues([9.0, 10.0, 11.0])
    pocket = select_pocket(prot, [np.zeros((1, 3))])
    assert pocket.sorted_residues() == [("A", 1, ""), ("A", 2, "")]


def test_pocket_none_within_cutoff():
    with pytest.raises(PocketError):
        select_pocket(_single_atom_residues([30.0]), [np.zeros((1, 3))])


@given(st.floats(1, 20), st.floats(0, 10))
def test_pocket_monotone_in_cutoff(c, extra):
    prot = b.pocket_protein()
    lig = [b.benzoate_coords()]

    def pocket(cut):
        try:
            return select_pocket(prot, lig, cut).residues
        except PocketError:
            return frozenset()

    assert pocket(c) <= pocket(c + extra)


def test_align_pocket_moved_copy_and_rotation():
    prot = b.pocket_protein()
    pocket = select_pocket(prot, [b.benzoate_coords()])
    R, t = b.rotation((0.2, 1, 0.4), 123), np.array([10.0, -4, 2])
    moved = b.moved_structure(prot, R, t)
    tr = align_pocket(moved, prot, pocket, None)
    back = tr.apply(moved.coords)
    assert np.sqrt(np.mean(np.sum((back - prot.coords) ** 2, axis=1))) < 1e-6
    assert np.allclose(tr.rotation, R.T, atol=1e-9)


def test_align_pocket_uses_intersection():
    prot = b.pocket_protein()
    pocket = select_pocket(prot, [b.benzoate_coords()])
    R, t = b.rotation((1, 0, 0), 40), np.array([0.0, 3, 0])
    moved = b.moved_structure(prot, R, t)
    missing = Structure(tuple(a for a in moved.atoms if a.residue_seq != 1))
    tr = align_pocket(missing, prot, pocket, None)
    assert np.allclose(tr.apply(moved.coords), prot.coords, atol=1e-6)


# -- chains --------------------------------------------------------------------


def _chain(cid, resnames, offset=0.0):
    return [Atom("C", "CA", (offset + 3.8 * k, 0.0, 0.0), cid, k + 1, r) for k, r in enumerate(resnames)]


SEQ1 = ["ALA", "GLY", "SER", "LEU", "LYS", "ASP"]
SEQ2 = ["TRP", "PHE", "TYR", "MET", "HIS", "ARG"]


def test_identical_single_chain():
    s = Structure(tuple(_chain("A", SEQ1)))
    m = map_chains(s, s)
    assert m.pairs == (("A", "A"),)
    assert m.score == 1.0


def test_identical_chains_swapped_tie_break():
    ref = Structure(tuple(_chain("A", SEQ1) + _chain("B", SEQ1, 50)))
    pred = Structure(tuple(_chain("A", SEQ1, 50) + _chain("B", SEQ1)))
    m = map_chains(pred, ref)
    assert sum(m.identities.values()) == 2.0
    assert m.pairs == (("A", "A"), ("B", "B"))


def test_identity_floor():
    ref = Structure(tuple(_chain("A", SEQ1)))
    pred = Structure(tuple(_chain("A", SEQ2)))
    m = map_chains(pred, ref)
    assert m.pairs == ()
    assert m.unmapped_reference == ("A",)


def test_sequence_identity_lcs():
    assert sequence_identity("AGSLKD", "AGSLKD") == 1.0
    assert sequence_identity("ABCD", "ACD") == pytest.approx(3 / 4)
    assert sequence_identity("", "A") == 0.0


def test_three_by_three_diagonal():
    w = np.array([[0.9, 0.2, 0.1], [0.3, 0.8, 0.2], [0.1, 0.4, 0.7]])
    assert optimal_assignment(w) == [(0, 0), (1, 1), (2, 2)]
    best = max(sum(w[i, p[i]] for i in range(3)) for p in itertools.permutations(range(3)))
    assert best == pytest.approx(0.9 + 0.8 + 0.7)


@given(seeds)
def test_assignment_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n_r, n_c = int(rng.integers(1, 7)), int(rng.integers(1, 7))
    w = np.round(rng.uniform(0, 1, size=(n_r, n_c)), 1)
    allowed = w >= 0.3
    chosen = optimal_assignment(w, allowed)
    assert len({r for r, _ in chosen}) == len(chosen) == len({c for _, c in chosen})
    assert all(allowed[r, c] for r, c in chosen)
    assert sum(w[r, c] for r, c in chosen) == pytest.approx(brute_assignment(w, allowed), abs=1e-9)


# -- fragments -------------------------------------------------------------------


def test_swapped_ions_reassigned():
    ref = np.array([[0.0, 0, 0], [5.0, 0, 0]])
    pred = ref[::-1]

    def cost(i, j):
        return float(np.linalg.norm(ref[i] - pred[j]))

    a = assign_fragments(["Zn", "Zn"], ["Zn", "Zn"], cost)
    assert a.pairs == {0: 1, 1: 0}
    assert a.reassigned
    # positional pairing would have cost 5 per fragment
    assert cost(0, 0) == 5.0


def test_fragments_only_pair_same_formula():
    a = assign_fragments(["C7O2", "Zn"], ["Zn", "C7O2"], lambda i, j: 0.0)
    assert a.pairs == {0: 1, 1: 0}
    assert not a.reassigned
