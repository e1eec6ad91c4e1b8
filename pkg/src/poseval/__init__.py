"""Protein-ligand pose evaluation: structural metrics, interaction fingerprints and benchmark aggregation."""

__version__ = "0.1.0"
