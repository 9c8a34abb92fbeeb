"""Thin model-serving sidecar for token log-probs, embeddings, and generation."""

__version__ = "0.1.0"
