"""Command-line front end.

Exit codes: 0 on success (bad poses are data, not errors), 1 when an input
cannot be read or an output cannot be written, 2 for usage and
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import AggregationError, ConfigError, PosevalError
from .harness.aggregate import aggregate, correlate, plif_wm_per_complex, plif_wm_report
from .harness.analysis import SUMMARY_FIELDS, annotate_failures, failed_targets, interaction_distribution, read_annotations, rows_to_csv
from .harness.config import PosevalConfig
from .harness.manifest import load_manifest, summarize_manifest
from .harness.pipeline import load_ligands
from .harness.report import WORKERS_ENV, default_workers, dumps, load_score_dir, run_batch, write_score_dir, write_text
from .harness.sites import group_ligand_sites
from .plif.types import Fingerprint
from .structio import read_pdb
from .validity import pb_valid

EXIT_OK, EXIT_IO, EXIT_USAGE = 0, 1, 2
RATE_FIELDS = ("method", "metric", "mean", "std", "n_runs", "n_scored", "n_excluded")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_IO):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--workers", type=int, default=None, help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    g.add_argument("--config", type=Path, default=None, help="JSON file of threshold overrides")
    g.add_argument("--out", type=Path, default=Path("poseval_out"), help="output directory (default: poseval_out)")
    return p


def _criteria_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("success criteria")
    g.add_argument("--rmsd-cutoff", type=float, default=None, help="RMSD success cutoff in A (default 2)")
    g.add_argument("--centroid-cutoff", type=float, default=None, help="centroid RMSD cutoff in A (default 1)")
    g.add_argument(
        "--no-require-pb-valid",
        action="store_true",
        help="drop the PB-Valid requirement from the combined success rate",
    )


def _score_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("manifest", type=Path, help="JSON-lines manifest")
    p.add_argument("--method", default=None, help="method name recorded in the reports")
    p.add_argument("--dataset", default=None, help="dataset name recorded in the reports")
    p.add_argument("--pre-align-ligand", action="store_true", help="superpose the ligand onto the reference before RMSD")
    p.add_argument("--raw-count-emd", action="store_true", help="compare raw interaction counts instead of normalised histograms")
    _criteria_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poseval",
        description="Score protein-ligand pose predictions against reference structures.",
    )
    parser.add_argument("--version", action="version", version=f"poseval {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    common = _common()

    p = sub.add_parser("score", parents=[common], help="score every manifest entry with its declared protocol")
    _score_flags(p)
    p = sub.add_parser("score-multi", parents=[common], help="score every manifest entry with the multi-ligand protocol")
    _score_flags(p)

    p = sub.add_parser("compare", parents=[common], help="compare score directories of several methods")
    p.add_argument("score_dirs", nargs="+", type=Path, help="directories written by 'score'")
    p.add_argument("--per-complex-wm", action="store_true", help="PLIF-WM per target, then averaged per method")
    _criteria_flags(p)

    p = sub.add_parser("sites", parents=[common], help="group reference ligands into docking sites")
    p.add_argument("protein", type=Path, help="protein PDB file")
    p.add_argument("ligands", nargs="+", type=Path, help="ligand SDF/PDB files")

    p = sub.add_parser("correlate", parents=[common], help="Pearson and Spearman correlation of two columns")
    p.add_argument("table", type=Path, nargs="?", default=None, help="CSV or TSV file with a header row")
    p.add_argument("--x", default=None, help="x column (default: first column)")
    p.add_argument("--y", default=None, help="y column (default: second column)")
    p.add_argument("--scores", type=Path, default=None, help="score directory; x is the manifest similarity score")
    p.add_argument("--manifest", type=Path, default=None, help="manifest providing similarity scores (with --scores)")
    p.add_argument(
        "--metric", default="rmsd_symmetry_corrected", help="per-complex metric averaged over runs (with --scores)"
    )
    p.add_argument("--permutation-p", action="store_true", help="p-values from a seeded permutation test")
    p.add_argument("--permutations", type=int, default=None, help="number of permutations (default 10000)")
    p.add_argument("--seed", type=int, default=None, help="permutation seed (default 0)")

    p = sub.add_parser("annotate", parents=[common], help="histogram of annotations over failed targets")
    p.add_argument("score_dirs", nargs="+", type=Path, help="directories written by 'score'")
    p.add_argument("--annotations", type=Path, required=True, help="TSV of target id and ';'-separated keywords")
    p.add_argument("--method", default=None, help="only count failures of this method")
    _criteria_flags(p)

    p = sub.add_parser("interactions", parents=[common], help="interaction-type count distributions")
    p.add_argument("score_dirs", nargs="+", type=Path, help="directories written by 'score'")

    p = sub.add_parser("validate", parents=[common], help="run the pose validity checks on ligand files")
    p.add_argument("ligands", nargs="+", type=Path, help="ligand SDF/PDB files, checked together")
    p.add_argument("--protein", type=Path, default=None, help="protein PDB for the protein-ligand clash check")
    return parser


# ---------------------------------------------------------------------------
# helpers


def _config(args) -> PosevalConfig:
    cfg = PosevalConfig.load(args.config) if args.config is not None else PosevalConfig()
    changes = {}
    for flag in ("pre_align_ligand", "raw_count_emd", "per_complex_wm", "permutation_p"):
        if getattr(args, flag, False):
            changes[flag] = True
    for flag in ("permutations", "seed"):
        if getattr(args, flag, None) is not None:
            changes[flag] = getattr(args, flag)
    crit = {}
    if getattr(args, "rmsd_cutoff", None) is not None:
        crit["rmsd_cutoff"] = args.rmsd_cutoff
    if getattr(args, "centroid_cutoff", None) is not None:
        crit["centroid_cutoff"] = args.centroid_cutoff
    if getattr(args, "no_require_pb_valid", False):
        crit["require_pb_valid"] = False
    if crit:
        changes["criteria"] = replace(cfg.criteria, **crit)
    return cfg.updated(**changes) if changes else cfg


def _echo(out: Path, cfg: PosevalConfig) -> None:
    write_text(out / "config.json", dumps(cfg.to_dict()))


def _say(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def _table(rows: Sequence[dict], fields: Sequence[str]) -> str:
    cells = [[str(f) for f in fields]] + [[_fmt(r.get(f)) for f in fields] for r in rows]
    widths = [max(len(c[k]) for c in cells) for k in range(len(fields))]
    return "\n".join("  ".join(c[k].ljust(widths[k]) for k in range(len(fields))).rstrip() for c in cells)


def _load_dirs(dirs: Sequence[Path]) -> list[tuple[str, dict, dict]]:
    loaded = []
    for d in dirs:
        if not (d / "aggregate.json").is_file():
            raise CliError(f"{d}: not a score directory (aggregate.json missing)")
        meta, runs = load_score_dir(d)
        loaded.append((meta.get("method") or d.name, meta, runs))
    names = [m for m, _, _ in loaded]
    if len(set(names)) != len(names):
        loaded = [(f"{m}@{d.name}", meta, runs) for (m, meta, runs), d in zip(loaded, dirs)]
    return loaded


def _all_scores(runs: dict) -> list:
    return [s for r in runs.values() for s in r]


# ---------------------------------------------------------------------------
# commands


def cmd_score(args, force_multi: bool = False) -> int:
    cfg = _config(args)
    entries = load_manifest(args.manifest)
    if force_multi:
        entries = [replace(e, mode="multi") for e in entries]
    summary = summarize_manifest(entries, args.dataset)
    workers = args.workers if args.workers is not None else default_workers()
    method = args.method or next((e.method for e in entries if e.method), None) or "method"
    dataset = args.dataset or summary.dataset or "dataset"
    runs = run_batch(entries, cfg, max(1, workers))
    aggs = write_score_dir(args.out, runs, cfg, method, dataset)
    write_text(args.out / "manifest_summary.txt", summary.text() + "\n")
    _say(summary.text())
    if aggs is None:
        _say("every complex was excluded; no aggregate metrics")
    else:
        rows = [{"method": method, **a.to_dict()} for a in aggs]
        _say(_table(rows, RATE_FIELDS))
    return EXIT_OK


def _check_targets(loaded) -> None:
    sets = {m: set(meta.get("targets", [])) for m, meta, _ in loaded}
    union = set().union(*sets.values())
    problems = []
    for m in sorted(sets):
        missing = sorted(union - sets[m])
        if missing:
            problems.append(f"{m} lacks {', '.join(missing)}")
    if problems:
        raise CliError("score directories cover different targets: " + "; ".join(problems))


def cmd_compare(args) -> int:
    cfg = _config(args)
    loaded = _load_dirs(args.score_dirs)
    _check_targets(loaded)
    rate_rows, mean_emd, per_target = [], {}, {}
    for method, meta, runs in loaded:
        try:
            aggs = aggregate(runs, cfg.criteria)
        except AggregationError:
            aggs = []
        for a in aggs:
            rate_rows.append({"method": method, **a.to_dict()})
            if a.metric_name == "plif_emd_mean":
                mean_emd[method] = a.mean
        for s in _all_scores(runs):
            if s.plif_emd is not None:
                per_target.setdefault(s.target_id, {}).setdefault(method, []).append(s.plif_emd)
    wm = None
    if cfg.per_complex_wm and per_target:
        wm = plif_wm_per_complex({t: {m: float(np.mean(v)) for m, v in d.items()} for t, d in per_target.items()})
    elif mean_emd:
        wm = plif_wm_report(mean_emd)
    wm_rows = [{"method": m, "plif_emd": wm.emd[m], "plif_wm": wm.scores[m]} for m in wm.cohort] if wm else []
    out = args.out
    _echo(out, cfg)
    write_text(out / "compare_rates.csv", rows_to_csv(rate_rows, RATE_FIELDS))
    write_text(out / "compare_wm.csv", rows_to_csv(wm_rows, ("method", "plif_emd", "plif_wm")))
    report = {
        "methods": [m for m, _, _ in loaded],
        "directories": [str(d) for d in args.score_dirs],
        "rates": rate_rows,
        "plif_wm": wm.to_dict() if wm else None,
    }
    write_text(out / "compare.json", dumps(report))
    _say(_table(rate_rows, RATE_FIELDS))
    if wm_rows:
        _say("")
        _say(_table(wm_rows, ("method", "plif_emd", "plif_wm")))
    return EXIT_OK


def cmd_sites(args) -> int:
    cfg = _config(args)
    protein = read_pdb(args.protein)
    ligands, sources = [], []
    for path in args.ligands:
        for k, g in enumerate(load_ligands([path], cfg.bond_tolerance)):
            ligands.append(g)
            sources.append({"file": str(path), "record": k, "name": g.name})
    if not ligands:
        raise CliError("no ligands found")
    groups = group_ligand_sites(ligands, protein, cfg.site_link_distance, cfg.pocket_cutoff, cfg.site_box_size)
    report = {
        "link_distance": cfg.site_link_distance,
        "pocket_cutoff": cfg.pocket_cutoff,
        "box_size": cfg.site_box_size,
        "ligands": sources,
        "sites": [g.to_dict() for g in groups],
    }
    _echo(args.out, cfg)
    write_text(args.out / "sites.json", dumps(report))
    for k, g in enumerate(groups):
        c = ", ".join(f"{x:.3f}" for x in g.center)
        _say(f"site {k}: ligands {list(g.members)} center ({c}) box {g.size:g} A [{g.center_source}]")
    return EXIT_OK


def _read_table(path: Path, x: str | None, y: str | None) -> tuple[str, str, list[float], list[float]]:
    delim = "\t" if path.suffix.lower() in (".tsv", ".tab") else ","
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter=delim)
        cols = reader.fieldnames or []
        if len(cols) < 2 and (x is None or y is None):
            raise CliError(f"{path}: need two columns", EXIT_USAGE)
        x = x or cols[0]
        y = y or cols[1]
        for c in (x, y):
            if c not in cols:
                raise CliError(f"{path}: no column {c!r} (have {', '.join(cols)})", EXIT_USAGE)
        xs, ys = [], []
        for row in reader:
            if not (row.get(x) or "").strip() or not (row.get(y) or "").strip():
                continue
            try:
                xs.append(float(row[x]))
                ys.append(float(row[y]))
            except ValueError as exc:
                raise CliError(f"{path}: non-numeric value ({exc})", EXIT_USAGE) from exc
    return x, y, xs, ys


def _from_scores(args) -> tuple[str, str, list[float], list[float]]:
    if args.manifest is None:
        raise CliError("--scores needs --manifest for the similarity scores", EXIT_USAGE)
    sim = {e.target_id: e.similarity_score for e in load_manifest(args.manifest)}
    _, runs = load_score_dir(args.scores)
    per: dict[str, list[float]] = {}
    for s in _all_scores(runs):
        v = getattr(s, args.metric, None) if args.metric in s.METRICS else None
        if v is not None and not isinstance(v, dict):
            per.setdefault(s.target_id, []).append(float(v))
    xs, ys = [], []
    for t in sorted(per):
        if sim.get(t) is not None:
            xs.append(float(sim[t]))
            ys.append(float(np.mean(per[t])))
    return "similarity_score", args.metric, xs, ys


def cmd_correlate(args) -> int:
    cfg = _config(args)
    if args.scores is not None:
        xn, yn, xs, ys = _from_scores(args)
    elif args.table is not None:
        xn, yn, xs, ys = _read_table(args.table, args.x, args.y)
    else:
        raise CliError("give a table or --scores with --manifest", EXIT_USAGE)
    try:
        res = correlate(xs, ys, permutation=cfg.permutation_p, n_permutations=cfg.permutations, seed=cfg.seed)
    except ValueError as exc:
        raise CliError(f"cannot correlate: {exc}", EXIT_USAGE) from exc
    report = {"x": xn, "y": yn, **res.to_dict()}
    _echo(args.out, cfg)
    write_text(args.out / "correlation.json", dumps(report))
    _say(
        f"n={res.n} pearson r={res.pearson_r:.4f} (p={res.pearson_p:.3g}) "
        f"spearman rho={res.spearman_rho:.4f} (p={res.spearman_p:.3g}) [{res.p_method}]"
    )
    return EXIT_OK


def cmd_annotate(args) -> int:
    cfg = _config(args)
    loaded = _load_dirs(args.score_dirs)
    scores = {m: _all_scores(runs) for m, _, runs in loaded}
    if args.method is not None and args.method not in scores:
        raise CliError(f"no score directory for method {args.method!r} (have {', '.join(sorted(scores))})", EXIT_USAGE)
    annotations = read_annotations(args.annotations)
    hist = annotate_failures(scores, annotations, cfg.criteria, args.method)
    failed = failed_targets(scores, cfg.criteria, args.method)
    rows = [{"keyword": k, "count": v} for k, v in hist.items()]
    _echo(args.out, cfg)
    write_text(args.out / "annotations.csv", rows_to_csv(rows, ("keyword", "count")))
    write_text(args.out / "failures.json", dumps({"method": args.method, "failed_targets": failed, "histogram": hist}))
    _say(f"{len(failed)} failed target(s)")
    if rows:
        _say(_table(rows, ("keyword", "count")))
    return EXIT_OK


def cmd_interactions(args) -> int:
    cfg = _config(args)
    loaded = _load_dirs(args.score_dirs)
    fps: dict[tuple[str, str], list[Fingerprint]] = {}
    refs: dict[tuple[str, str], Fingerprint] = {}
    for method, meta, runs in loaded:
        dataset = meta.get("dataset") or "dataset"
        bucket = fps.setdefault((dataset, method), [])
        for s in _all_scores(runs):
            if s.excluded:
                continue
            bucket.append(Fingerprint.from_json(s.details.get("fingerprint_pred", [])))
            refs.setdefault((dataset, s.target_id), Fingerprint.from_json(s.details.get("fingerprint_ref", [])))
    for (dataset, _), fp in sorted(refs.items()):
        fps.setdefault((dataset, "reference"), []).append(fp)
    summary, hist = interaction_distribution(fps)
    _echo(args.out, cfg)
    write_text(args.out / "interactions_summary.csv", rows_to_csv(summary, SUMMARY_FIELDS))
    write_text(
        args.out / "interactions_histogram.csv",
        rows_to_csv(hist, ("dataset", "method", "interaction_type", "count", "n_complexes")),
    )
    _say(_table(summary, ("dataset", "method", "interaction_type", "n_complexes", "mean", "median", "iqr")))
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _config(args)
    ligands = load_ligands(args.ligands, cfg.bond_tolerance)
    if not ligands:
        raise CliError("no ligands found")
    protein = read_pdb(args.protein).polymer() if args.protein is not None else None
    report = pb_valid(ligands, protein, cfg.validity)
    _echo(args.out, cfg)
    write_text(args.out / "validity.json", dumps(report.to_dict()))
    for name, ok in report.per_check.items():
        _say(f"{name:22s} {'pass' if ok else 'FAIL'}")
    _say(f"{'pb_valid':22s} {'pass' if report.overall else 'FAIL'} (disabled: {', '.join(report.disabled)})")
    return EXIT_OK


COMMANDS = {
    "score": cmd_score,
    "score-multi": lambda a: cmd_score(a, force_multi=True),
    "compare": cmd_compare,
    "sites": cmd_sites,
    "correlate": cmd_correlate,
    "annotate": cmd_annotate,
    "interactions": cmd_interactions,
    "validate": cmd_validate,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        parser.error("--workers must be at least 1")
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        sys.stderr.write(f"poseval: error: {exc}\n")
        return exc.code
    except ConfigError as exc:
        sys.stderr.write(f"poseval: configuration error: {exc}\n")
        return EXIT_USAGE
    except (OSError, PosevalError) as exc:
        sys.stderr.write(f"poseval: error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
