"""Reading order detection: data model, baseline, metrics, model, generator."""

from .core import (
    AlignmentError,
    BBox,
    DataError,
    OrderPrediction,
    Page,
    Token,
    appearance_indices,
    permutation_from_layout_order,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "BBox",
    "DataError",
    "OrderPrediction",
    "Page",
    "Token",
    "appearance_indices",
    "permutation_from_layout_order",
    "__version__",
]
