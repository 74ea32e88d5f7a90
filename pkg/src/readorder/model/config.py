"""Model hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass

from ..core import DataError

MODES = ("full", "text_only", "layout_only")


@dataclass(frozen=True, slots=True)
class ModelConfig:
    """Toy-scale defaults: trains on a CPU in minutes.

    ``mode`` selects the active embedding families: ``text_only`` drops the
    box-coordinate embeddings, ``layout_only`` drops the word embeddings; the
    1D position embedding is always on.
    """

    layers: int = 2
    hidden_dim: int = 128
    heads: int = 4
    ffn_dim: int = 512
    max_tokens_per_page: int = 128
    coord_grid: int = 1000
    mode: str = "full"
    vocab_size: int = 4096
    dropout: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.layers < 1:
            raise DataError(f"layers must be >= 1, got {self.layers}")
        if self.hidden_dim < 1 or self.hidden_dim % self.heads != 0:
            raise DataError(
                f"hidden_dim ({self.hidden_dim}) must be positive and divisible "
                f"by heads ({self.heads})"
            )
        if self.ffn_dim < 1:
            raise DataError(f"ffn_dim must be >= 1, got {self.ffn_dim}")
        if self.max_tokens_per_page < 1:
            raise DataError(f"max_tokens_per_page must be >= 1, got {self.max_tokens_per_page}")
        if self.coord_grid < 1:
            raise DataError(f"coord_grid must be >= 1, got {self.coord_grid}")
        if self.mode not in MODES:
            raise DataError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.vocab_size < 2:
            raise DataError(f"vocab_size must be >= 2, got {self.vocab_size}")
        if not 0.0 <= self.dropout < 1.0:
            raise DataError(f"dropout must be in [0, 1), got {self.dropout}")

    @property
    def max_positions(self) -> int:
        # begin slot + source segment + target segment
        return 1 + 2 * self.max_tokens_per_page
