"""JSON-lines benchmark manifests.

One entry per line::

    {"target_id": "1abc", "mode": "primary",
     "ref_protein_path": "ref/1abc_protein.pdb",
     "ref_ligand_paths": ["ref/1abc_ligand.sdf"],
     "primary_ligand_index": 0,
     "predicted_complex_paths": ["run0/1abc.pdb", {"protein": "run1/1abc.pdb", "ligands": ["run1/1abc.sdf"]}]}

Relative paths resolve against the manifest's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ManifestError

MODES = ("primary", "multi")

# reference sizes of the public benchmark collections (total ligands/complexes)
DATASET_SIZES = {
    "astex_diverse": 85,
    "dockgen_e": 122,
    "posebusters": (130, 308),
    "casp15": {"single": 6, "multi": 13},
}
_DATASET_ALIASES = {
    "astex": "astex_diverse",
    "astex_diverse": "astex_diverse",
    "dockgen": "dockgen_e",
    "dockgen_e": "dockgen_e",
    "dockgen-e": "dockgen_e",
    "posebusters": "posebusters",
    "posebusters_benchmark": "posebusters",
    "casp15": "casp15",
}

_REQUIRED = ("target_id", "ref_protein_path", "ref_ligand_paths", "predicted_complex_paths")
_OPTIONAL = {
    "mode",
    "primary_ligand_index",
    "smiles",
    "ligand_ids",
    "similarity_score",
    "annotation",
    "dataset",
    "method",
}


@dataclass(frozen=True)
class Prediction:
    """One run's predicted complex: a protein file and optional separate ligand files.

    With no ligand files the ligands are the HETATM groups of the protein file.
    """

    protein: Path
    ligands: tuple[Path, ...] = ()

    @property
    def layout(self) -> str:
        if not self.ligands:
            return "pdb_hetatm"
        if len(self.ligands) == 1:
            return "sdf_single_file"
        return "sdf_per_fragment"

    def paths(self) -> tuple[Path, ...]:
        return (self.protein, *self.ligands)

    def to_dict(self) -> dict:
        return {"protein": str(self.protein), "ligands": [str(p) for p in self.ligands]}


@dataclass(frozen=True)
class ManifestEntry:
    target_id: str
    ref_protein_path: Path
    ref_ligand_paths: tuple[Path, ...]
    predicted_complex_paths: tuple[Prediction, ...]  # one per run
    mode: str = "primary"
    primary_ligand_index: int = 0
    smiles: tuple[str, ...] | None = None
    ligand_ids: tuple[str, ...] | None = None
    similarity_score: float | None = None
    annotation: str | None = None
    dataset: str | None = None
    method: str | None = None
    line: int = 0

    @property
    def n_runs(self) -> int:
        return len(self.predicted_complex_paths)

    @property
    def n_reference_ligands(self) -> int:
        if self.ligand_ids is not None:
            return len(self.ligand_ids)
        return len(self.ref_ligand_paths)

    def ligand_id(self, index: int) -> str:
        if self.ligand_ids is not None and index < len(self.ligand_ids):
            return self.ligand_ids[index]
        return f"L{index}"


def _resolve(base: Path, value, line: int, name: str) -> Path:
    if not isinstance(value, str) or not value:
        raise ManifestError("path must be a non-empty string", line, name)
    p = Path(value)
    return p if p.is_absolute() else base / p


def _str_list(value, line: int, name: str, allow_empty: bool = False) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ManifestError("expected a list of strings", line, name)
    if not value and not allow_empty:
        raise ManifestError("list must not be empty", line, name)
    return tuple(value)


def _prediction(base: Path, value, line: int, name: str) -> Prediction:
    if isinstance(value, str):
        return Prediction(_resolve(base, value, line, name))
    if isinstance(value, dict):
        extra = set(value) - {"protein", "ligands"}
        if extra:
            raise ManifestError(f"unknown key(s) {sorted(extra)}", line, name)
        if "protein" not in value:
            raise ManifestError("missing 'protein'", line, name)
        ligands = _str_list(value.get("ligands", []), line, f"{name}.ligands", allow_empty=True)
        return Prediction(
            _resolve(base, value["protein"], line, f"{name}.protein"),
            tuple(_resolve(base, p, line, f"{name}.ligands") for p in ligands),
        )
    raise ManifestError("expected a path or an object with 'protein' and 'ligands'", line, name)


def parse_entry(obj, line: int, base: Path) -> ManifestEntry:
    """Validate one decoded manifest line."""
    if not isinstance(obj, dict):
        raise ManifestError("entry must be a JSON object", line)
    for name in _REQUIRED:
        if name not in obj:
            raise ManifestError("required field missing", line, name)
    unknown = sorted(set(obj) - set(_REQUIRED) - _OPTIONAL)
    if unknown:
        raise ManifestError(f"unknown field(s): {', '.join(unknown)}", line, unknown[0])
    target = obj["target_id"]
    if not isinstance(target, str) or not target:
        raise ManifestError("must be a non-empty string", line, "target_id")
    mode = obj.get("mode", "primary")
    if mode not in MODES:
        raise ManifestError(f"must be one of {MODES}", line, "mode")
    ref_ligs = _str_list(obj["ref_ligand_paths"], line, "ref_ligand_paths")
    runs = obj["predicted_complex_paths"]
    if not isinstance(runs, list) or not runs:
        raise ManifestError("need at least one run", line, "predicted_complex_paths")
    preds = tuple(_prediction(base, r, line, f"predicted_complex_paths[{k}]") for k, r in enumerate(runs))
    seen = set()
    for k, p in enumerate(preds):
        for path in p.paths():
            if path in seen:
                raise ManifestError(f"path {path} reused across runs", line, f"predicted_complex_paths[{k}]")
            seen.add(path)
    ligand_ids = obj.get("ligand_ids")
    if ligand_ids is not None:
        ligand_ids = _str_list(ligand_ids, line, "ligand_ids")
        if len(set(ligand_ids)) != len(ligand_ids):
            raise ManifestError("ligand ids must be unique", line, "ligand_ids")
    smiles = obj.get("smiles")
    if smiles is not None:
        smiles = _str_list(smiles, line, "smiles")
    idx = obj.get("primary_ligand_index", 0)
    if not isinstance(idx, int) or isinstance(idx, bool) or idx < 0:
        raise ManifestError("must be a non-negative integer", line, "primary_ligand_index")
    n_lig = len(ligand_ids) if ligand_ids is not None else (len(ref_ligs) if len(ref_ligs) > 1 else None)
    if mode == "primary" and n_lig is not None and idx >= n_lig:
        raise ManifestError(f"index {idx} out of range for {n_lig} reference ligands", line, "primary_ligand_index")
    sim = obj.get("similarity_score")
    if sim is not None and (not isinstance(sim, (int, float)) or isinstance(sim, bool)):
        raise ManifestError("must be a number", line, "similarity_score")
    for name in ("annotation", "dataset", "method"):
        if obj.get(name) is not None and not isinstance(obj[name], str):
            raise ManifestError("must be a string", line, name)
    return ManifestEntry(
        target_id=target,
        ref_protein_path=_resolve(base, obj["ref_protein_path"], line, "ref_protein_path"),
        ref_ligand_paths=tuple(_resolve(base, p, line, "ref_ligand_paths") for p in ref_ligs),
        predicted_complex_paths=preds,
        mode=mode,
        primary_ligand_index=idx,
        smiles=smiles,
        ligand_ids=ligand_ids,
        similarity_score=None if sim is None else float(sim),
        annotation=obj.get("annotation"),
        dataset=obj.get("dataset"),
        method=obj.get("method"),
        line=line,
    )


def parse_manifest(text: str, base: str | Path = ".") -> list[ManifestEntry]:
    base = Path(base)
    entries = []
    ids = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"invalid JSON ({exc.msg})", lineno) from exc
        entry = parse_entry(obj, lineno, base)
        if entry.target_id in ids:
            raise ManifestError(f"duplicate target_id {entry.target_id!r}", lineno, "target_id")
        ids.add(entry.target_id)
        entries.append(entry)
    if not entries:
        raise ManifestError("manifest has no entries")
    return entries


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Read and validate a JSON-lines manifest."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc.strerror}") from exc
    return parse_manifest(text, path.parent)


@dataclass(frozen=True)
class ManifestSummary:
    n: int
    n_single: int
    n_multi: int
    n_primary_mode: int
    n_multi_mode: int
    n_runs: tuple[int, ...]
    dataset: str | None = None
    expected: object = None
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def matches_expected(self) -> bool:
        return not self.warnings

    def text(self) -> str:
        head = f"dataset={self.dataset} " if self.dataset else ""
        runs = ",".join(str(r) for r in self.n_runs)
        lines = [f"{head}n={self.n} (n={self.n_single} single, n={self.n_multi} multi); runs per entry: {runs}"]
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines)


def canonical_dataset(name: str | None) -> str | None:
    if name is None:
        return None
    return _DATASET_ALIASES.get(name.strip().lower().replace(" ", "_"), name)


def summarize_manifest(entries: list[ManifestEntry], dataset: str | None = None) -> ManifestSummary:
    """Count entries per ligand multiplicity and cross-check known dataset sizes.

    An entry is 'single' when it declares one reference ligand and 'multi'
    otherwise. Size mismatches are reported as warnings, not errors.
    """
    if dataset is None:
        names = {e.dataset for e in entries if e.dataset}
        dataset = names.pop() if len(names) == 1 else None
    dataset = canonical_dataset(dataset)
    n = len(entries)
    n_single = sum(1 for e in entries if e.n_reference_ligands == 1)
    n_multi = n - n_single
    n_runs = tuple(sorted({e.n_runs for e in entries}))
    expected = DATASET_SIZES.get(dataset) if dataset else None
    warnings = []
    if isinstance(expected, int) and n != expected:
        warnings.append(f"{dataset} has {expected} complexes; manifest lists {n}")
    elif isinstance(expected, tuple) and n not in expected:
        alts = " or ".join(str(x) for x in expected)
        warnings.append(f"{dataset} has {alts} complexes; manifest lists {n}")
    elif isinstance(expected, dict) and (n_single, n_multi) != (expected["single"], expected["multi"]):
        warnings.append(
            f"{dataset} has {expected['single']} single and {expected['multi']} multi-ligand complexes; "
            f"manifest lists {n_single} and {n_multi}"
        )
    if len(n_runs) > 1:
        warnings.append("entries disagree on the number of runs")
    return ManifestSummary(
        n,
        n_single,
        n_multi,
        sum(1 for e in entries if e.mode == "primary"),
        sum(1 for e in entries if e.mode == "multi"),
        n_runs,
        dataset,
        expected,
        tuple(warnings),
    )
