"""Benchmark orchestration: manifests, evaluation pipelines, aggregation and reports."""

from .aggregate import Correlation, RunAggregate, WmReport, aggregate, correlate, mean_std, plif_wm_per_complex, plif_wm_report, run_rates
from .analysis import UNANNOTATED, annotate_failures, failed_targets, interaction_distribution, read_annotations
from .config import PosevalConfig, SuccessCriteria
from .manifest import DATASET_SIZES, ManifestEntry, ManifestSummary, Prediction, load_manifest, parse_manifest, summarize_manifest
from .pipeline import TEMPLATE_FAILED, evaluate, evaluate_multi, evaluate_primary
from .report import load_score_dir, run_batch, write_score_dir
from .sites import SiteGroup, group_ligand_sites, site_partition

__all__ = [
    "Correlation",
    "DATASET_SIZES",
    "ManifestEntry",
    "ManifestSummary",
    "PosevalConfig",
    "Prediction",
    "RunAggregate",
    "SiteGroup",
    "SuccessCriteria",
    "TEMPLATE_FAILED",
    "UNANNOTATED",
    "WmReport",
    "aggregate",
    "annotate_failures",
    "correlate",
    "evaluate",
    "evaluate_multi",
    "evaluate_primary",
    "failed_targets",
    "group_ligand_sites",
    "interaction_distribution",
    "load_manifest",
    "load_score_dir",
    "mean_std",
    "parse_manifest",
    "plif_wm_per_complex",
    "plif_wm_report",
    "read_annotations",
    "run_batch",
    "run_rates",
    "site_partition",
    "summarize_manifest",
    "write_score_dir",
]
