"""Transformer hidden-state exporter for the reprmetrics interchange format."""

from .export import (
    EmptySequenceError,
    ExportError,
    ExportSpec,
    LayerOutOfRangeError,
    ModelLoadError,
    export_hidden_states,
)

__version__ = "0.1.0"

__all__ = [
    "EmptySequenceError",
    "ExportError",
    "ExportSpec",
    "LayerOutOfRangeError",
    "ModelLoadError",
    "export_hidden_states",
    "__version__",
]
