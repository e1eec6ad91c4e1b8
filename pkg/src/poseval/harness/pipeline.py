"""Per-complex evaluation: the primary-ligand and multi-ligand protocols.

Any failure inside a stage excludes the prediction with a reason; nothing
here raises for bad data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import MappingError, PocketError, PosevalError, SearchBudgetExceeded
from ..metrics.chains import ChainMap, map_chains
from ..metrics.lddt import lddt_pli
from ..metrics.pocket import PocketSelection, align_pocket_detailed, select_pocket
from ..metrics.rmsd import SymmetryRMSD, centroid_rmsd, rmsd_symmetry_corrected
from ..metrics.scores import ComplexScore, FragmentScore, assign_fragments
from ..molgraph import match_template, perceive_bonds
from ..plif.detect import detect_interactions
from ..plif.emd import plif_emd_detailed
from ..plif.types import Fingerprint, fingerprint
from ..structio import parse_smiles, read_ligands, read_pdb
from ..structio.types import MoleculeGraph, Structure
from ..validity import pb_valid
from .config import PosevalConfig
from .manifest import ManifestEntry, Prediction

TEMPLATE_FAILED = "template mapping failed"


class _Excluded(Exception):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(reason)
        self.reason = reason
        self.detail = detail


def _as_graph(lig, tolerance: float) -> MoleculeGraph:
    if isinstance(lig, MoleculeGraph):
        return lig
    g = perceive_bonds(lig.atoms, tolerance)
    name = lig.atoms[0].residue_name if len(lig) else ""
    return MoleculeGraph(g.nodes, g.edges, g.coords, name or g.name, False)


def load_ligands(paths, tolerance: float) -> list[MoleculeGraph]:
    out = []
    for p in paths:
        out.extend(_as_graph(l, tolerance) for l in read_ligands(p))
    return out


@dataclass
class _Inputs:
    ref_protein: Structure
    ref_ligands: list[MoleculeGraph]
    pred_protein: Structure
    pred_ligands: list[MoleculeGraph]
    layout: str


def _load(entry: ManifestEntry, run: int, config: PosevalConfig) -> _Inputs:
    if not 0 <= run < entry.n_runs:
        raise _Excluded("input error", f"run {run} not in manifest ({entry.n_runs} runs)")
    pred: Prediction = entry.predicted_complex_paths[run]
    try:
        ref_struct = read_pdb(entry.ref_protein_path)
        ref_ligs = load_ligands(entry.ref_ligand_paths, config.bond_tolerance)
        pred_struct = read_pdb(pred.protein)
        if pred.ligands:
            pred_ligs = load_ligands(pred.ligands, config.bond_tolerance)
        else:
            pred_ligs = [_as_graph(g, config.bond_tolerance) for g in pred_struct.ligand_groups()]
    except OSError as exc:
        raise _Excluded("input error", f"{exc.filename}: {exc.strerror}") from exc
    except (PosevalError, ValueError) as exc:
        raise _Excluded("input error", str(exc)) from exc
    if not ref_ligs:
        raise _Excluded("input error", "no reference ligands")
    if not pred_ligs:
        raise _Excluded(TEMPLATE_FAILED, "prediction contains no ligand")
    if entry.ligand_ids is not None and len(entry.ligand_ids) != len(ref_ligs):
        raise _Excluded("input error", f"{len(entry.ligand_ids)} ligand ids for {len(ref_ligs)} reference ligands")
    return _Inputs(ref_struct.polymer(), ref_ligs, pred_struct.polymer(), pred_ligs, pred.layout)


@dataclass
class _Aligned:
    chain_map: ChainMap
    pocket: PocketSelection
    pred_protein: Structure
    pred_ligands: list[MoleculeGraph]
    details: dict


def _align(inp: _Inputs, config: PosevalConfig, pocket_ligands: list[MoleculeGraph]) -> _Aligned:
    try:
        cmap = map_chains(inp.pred_protein, inp.ref_protein, config.identity_floor)
    except ValueError as exc:
        raise _Excluded("chain mapping failed", str(exc)) from exc
    if not cmap.pairs:
        raise _Excluded("chain mapping failed", "no chain pair reaches the identity floor")
    try:
        pocket = select_pocket(inp.ref_protein, pocket_ligands, config.pocket_cutoff)
    except PocketError as exc:
        raise _Excluded("pocket selection failed", str(exc)) from exc
    try:
        al = align_pocket_detailed(inp.pred_protein, inp.ref_protein, pocket, cmap)
    except PosevalError as exc:
        raise _Excluded("pocket alignment failed", str(exc)) from exc
    t = al.transform
    protein = inp.pred_protein.with_coords(t.apply(inp.pred_protein.coords))
    ligands = [g.with_coords(t.apply(g.coords)) for g in inp.pred_ligands]
    details = {
        "chain_map": cmap.to_dict(),
        "pocket_residues": [list(k) for k in pocket.sorted_residues()],
        "pocket_alignment": {
            "n_atoms": al.n_atoms,
            "rmsd_before": al.rmsd_before,
            "rmsd_after": al.rmsd_after,
            "transform": t.to_dict(),
        },
        "prediction_layout": inp.layout,
    }
    return _Aligned(cmap, pocket, protein, ligands, details)


def _symmetry_rmsd(ref: MoleculeGraph, pred: MoleculeGraph, config: PosevalConfig) -> SymmetryRMSD:
    mapping = match_template(
        ref, pred, use_charges=config.match_charges, use_bond_orders=config.match_bond_orders
    )
    return rmsd_symmetry_corrected(
        pred,
        ref,
        mapping,
        cap=config.automorphism_cap,
        use_charges=config.match_charges,
        use_bond_orders=config.match_bond_orders,
        pre_align=config.pre_align_ligand,
    )


def _check_smiles(entry: ManifestEntry, index: int, pred: MoleculeGraph) -> None:
    if entry.smiles is None or index >= len(entry.smiles):
        return
    try:
        template = parse_smiles(entry.smiles[index])
        match_template(template, pred, use_charges=False, use_bond_orders=False)
    except (PosevalError, ValueError) as exc:
        raise _Excluded(TEMPLATE_FAILED, f"ligand {index} does not match its SMILES: {exc}") from exc


@dataclass
class _Matched:
    pairs: dict  # ref index -> pred index
    sym: dict  # ref index -> SymmetryRMSD
    reassigned: bool
    errors: dict  # ref index -> message


def _match_fragments(ref_ligs, pred_ligs, config: PosevalConfig, wanted=None) -> _Matched:
    cache: dict[tuple[int, int], SymmetryRMSD | str] = {}
    wanted = set(range(len(ref_ligs))) if wanted is None else set(wanted)

    def cost(i, j):
        if i not in wanted:
            return math.inf
        if (i, j) not in cache:
            try:
                cache[i, j] = _symmetry_rmsd(ref_ligs[i], pred_ligs[j], config)
            except (MappingError, SearchBudgetExceeded, PosevalError) as exc:
                cache[i, j] = f"{type(exc).__name__}: {exc}"
        r = cache[i, j]
        return r.value if isinstance(r, SymmetryRMSD) else math.inf

    ref_f = [g.formula() for g in ref_ligs]
    pred_f = [g.formula() for g in pred_ligs]
    assignment = assign_fragments(ref_f, pred_f, cost)
    sym = {i: cache[i, j] for i, j in assignment.pairs.items()}
    errors = {}
    for i in sorted(wanted):
        if i in assignment.pairs:
            continue
        msgs = [v for (a, _), v in sorted(cache.items()) if a == i and isinstance(v, str)]
        errors[i] = msgs[0] if msgs else f"no predicted fragment with formula {ref_f[i]}"
    return _Matched(assignment.pairs, sym, assignment.reassigned, errors)


def _with_template(pred: MoleculeGraph, ref: MoleculeGraph, sym: SymmetryRMSD) -> MoleculeGraph:
    """Give a perceived prediction (no bond orders) the reference's chemistry.

    The heavy-atom graph of the reference is reused with the predicted
    coordinates placed through the best symmetry mapping, so charges, bond
    orders and aromaticity come from the template rather than from geometry.
    """
    if pred.bond_orders_known or not ref.bond_orders_known:
        return pred
    return ref.heavy().with_coords(pred.heavy().coords[sym.assignment])


def _ordered_coords(pred: MoleculeGraph, sym: SymmetryRMSD) -> np.ndarray:
    """Predicted heavy-atom coordinates in reference atom order."""
    return pred.heavy().coords[sym.assignment]


def _lddt_pli(aligned: _Aligned, ref_protein, pred_xyz: np.ndarray, ref_lig: MoleculeGraph, config):
    try:
        return lddt_pli(
            aligned.pred_protein,
            pred_xyz,
            ref_protein,
            ref_lig.heavy().coords,
            aligned.pocket,
            aligned.chain_map,
            config.lddt,
            config.pli_cross_radius,
        )
    except PosevalError:
        return None


def _fingerprints(protein, ligands, ids, config) -> Fingerprint:
    fp = Fingerprint()
    for g, lid in zip(ligands, ids):
        fp = fp + fingerprint(detect_interactions(protein, g, lid, config.interactions))
    return fp


def _emd_fields(pred_fp: Fingerprint, ref_fp: Fingerprint, config: PosevalConfig):
    res = plif_emd_detailed(pred_fp, ref_fp, normalize=not config.raw_count_emd)
    details = {
        "bin_order": [k.to_str() for k in res.bin_order],
        "fingerprint_pred": pred_fp.to_json(),
        "fingerprint_ref": ref_fp.to_json(),
    }
    return res.distance, res.flag, details


def evaluate_primary(entry: ManifestEntry, run: int, config: PosevalConfig = PosevalConfig()) -> ComplexScore:
    """Score the primary ligand of one predicted complex."""
    try:
        inp = _load(entry, run, config)
        idx = entry.primary_ligand_index
        if idx >= len(inp.ref_ligands):
            raise _Excluded("input error", f"primary ligand index {idx} out of range")
        ref_lig = inp.ref_ligands[idx]
        lid = entry.ligand_id(idx)
        aligned = _align(inp, config, inp.ref_ligands)
        matched = _match_fragments(inp.ref_ligands, aligned.pred_ligands, config, wanted=[idx])
        if idx not in matched.pairs:
            raise _Excluded(TEMPLATE_FAILED, matched.errors.get(idx, ""))
        pred_lig = aligned.pred_ligands[matched.pairs[idx]]
        _check_smiles(entry, idx, pred_lig)
        sym = matched.sym[idx]
        pli = _lddt_pli(aligned, inp.ref_protein, _ordered_coords(pred_lig, sym), ref_lig, config)
        pred_lig = _with_template(pred_lig, ref_lig, sym)
        validity = pb_valid([pred_lig], aligned.pred_protein, config.validity)
        pred_fp = _fingerprints(aligned.pred_protein, [pred_lig], [lid], config)
        ref_fp = _fingerprints(inp.ref_protein, [ref_lig], [lid], config)
        emd, emd_flag, emd_details = _emd_fields(pred_fp, ref_fp, config)
    except _Excluded as exc:
        return ComplexScore.exclude(entry.target_id, run, exc.reason, "primary", error=exc.detail)
    return ComplexScore(
        entry.target_id,
        run,
        "primary",
        rmsd=sym.naive,
        rmsd_symmetry_corrected=sym.value,
        centroid_rmsd=centroid_rmsd(pred_lig, ref_lig),
        lddt_pli=pli,
        pb_valid=validity.overall,
        plif_emd=emd,
        per_check=dict(validity.per_check),
        flags={
            "truncated": sym.truncated,
            "emd_flag": emd_flag,
            "lddt_pli_undefined": pli is None,
            "pre_align_ligand": config.pre_align_ligand,
        },
        details={
            **aligned.details,
            **emd_details,
            "ligand_id": lid,
            "n_automorphisms": sym.n_automorphisms,
            "validity": validity.to_dict(),
            "pred_fragment_index": matched.pairs[idx],
        },
    )


def evaluate_multi(entry: ManifestEntry, run: int, config: PosevalConfig = PosevalConfig()) -> ComplexScore:
    """Score every fragment of a multi-ligand complex after one pocket alignment."""
    try:
        inp = _load(entry, run, config)
        aligned = _align(inp, config, inp.ref_ligands)
        matched = _match_fragments(inp.ref_ligands, aligned.pred_ligands, config)
        missing = sorted(set(range(len(inp.ref_ligands))) - set(matched.pairs))
        if missing:
            detail = "; ".join(f"{entry.ligand_id(i)}: {matched.errors.get(i, '')}" for i in missing)
            raise _Excluded(TEMPLATE_FAILED, detail)
        for i, j in matched.pairs.items():
            _check_smiles(entry, i, aligned.pred_ligands[j])
        frags = []
        for i, ref_lig in enumerate(inp.ref_ligands):
            j = matched.pairs[i]
            sym = matched.sym[i]
            pred_lig = aligned.pred_ligands[j]
            frags.append(
                FragmentScore(
                    ref_index=i,
                    ligand_id=entry.ligand_id(i),
                    pred_index=j,
                    rmsd=sym.naive,
                    rmsd_symmetry_corrected=sym.value,
                    centroid_rmsd=centroid_rmsd(pred_lig, ref_lig),
                    lddt_pli=_lddt_pli(aligned, inp.ref_protein, _ordered_coords(pred_lig, sym), ref_lig, config),
                    truncated=sym.truncated,
                )
            )
        used = [
            _with_template(aligned.pred_ligands[matched.pairs[i]], ref_lig, matched.sym[i])
            for i, ref_lig in enumerate(inp.ref_ligands)
        ]
        ids = [entry.ligand_id(i) for i in range(len(inp.ref_ligands))]
        validity = pb_valid(used, aligned.pred_protein, config.validity)
        pred_fp = _fingerprints(aligned.pred_protein, used, ids, config)
        ref_fp = _fingerprints(inp.ref_protein, inp.ref_ligands, ids, config)
        emd, emd_flag, emd_details = _emd_fields(pred_fp, ref_fp, config)
    except _Excluded as exc:
        return ComplexScore.exclude(entry.target_id, run, exc.reason, "multi", error=exc.detail)

    def mean(name):
        vals = [getattr(f, name) for f in frags if getattr(f, name) is not None]
        return float(np.mean(vals)) if vals else None

    return ComplexScore(
        entry.target_id,
        run,
        "multi",
        rmsd=mean("rmsd"),
        rmsd_symmetry_corrected=mean("rmsd_symmetry_corrected"),
        centroid_rmsd=mean("centroid_rmsd"),
        lddt_pli=mean("lddt_pli"),
        pb_valid=validity.overall,
        plif_emd=emd,
        per_check=dict(validity.per_check),
        flags={
            "truncated": any(f.truncated for f in frags),
            "reassigned": matched.reassigned,
            "emd_flag": emd_flag,
            "lddt_pli_undefined": any(f.lddt_pli is None for f in frags),
            "pre_align_ligand": config.pre_align_ligand,
        },
        fragments=frags,
        details={
            **aligned.details,
            **emd_details,
            "validity": validity.to_dict(),
            "complex_metrics": "mean over fragments",
        },
    )


def evaluate(entry: ManifestEntry, run: int, config: PosevalConfig = PosevalConfig()) -> ComplexScore:
    """Dispatch on the entry's mode."""
    if entry.mode == "multi":
        return evaluate_multi(entry, run, config)
    return evaluate_primary(entry, run, config)
