"""Objective disclosive-transparency metrics over (abstract, document) pairs."""

__version__ = "0.1.0"
