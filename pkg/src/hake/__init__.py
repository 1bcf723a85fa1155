"""Polar-coordinate knowledge graph embeddings: HAKE and ModE models,
self-adversarial training, filtered link-prediction evaluation, and
hierarchy diagnostics."""

from .errors import DataError, NumericError, UsageError

__version__ = "0.1.0"

__all__ = ["DataError", "NumericError", "UsageError", "__version__"]
