"""Protein-ligand interaction fingerprints and histogram distances."""

from .detect import InteractionParams, detect_interactions
from .emd import BOTH_EMPTY, ONE_SIDE_EMPTY, EmdInput, EmdResult, emd_input, plif_emd, plif_emd_detailed, plif_wm, wasserstein_1d
from .types import Fingerprint, InteractionKey, InteractionRecord, InteractionType, fingerprint, residue_type

__all__ = [
    "BOTH_EMPTY",
    "ONE_SIDE_EMPTY",
    "EmdInput",
    "EmdResult",
    "Fingerprint",
    "InteractionKey",
    "InteractionParams",
    "InteractionRecord",
    "InteractionType",
    "detect_interactions",
    "emd_input",
    "fingerprint",
    "plif_emd",
    "plif_emd_detailed",
    "plif_wm",
    "residue_type",
    "wasserstein_1d",
]
