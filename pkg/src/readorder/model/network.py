"""Layout-aware transformer encoder with a pointer head over the source segment."""

from __future__ import annotations

import math

import torch
import torch.nn as nn
import torch.nn.functional as F

from .config import ModelConfig


def pointer_logits(hidden: torch.Tensor, source_embeddings: torch.Tensor) -> torch.Tensor:
    """Dot-product scores of decoder states against the source input embeddings.

    hidden: (..., T, D), source_embeddings: (..., S, D) -> (..., T, S). A
    softmax over the last axis gives the next-index distribution; any bias
    shared across candidates would cancel there, so none is added.
    """
    return hidden @ source_embeddings.transpose(-1, -2)


class _SelfAttention(nn.Module):
    def __init__(self, dim: int, heads: int, dropout: float):
        super().__init__()
        self.heads = heads
        self.head_dim = dim // heads
        self.query = nn.Linear(dim, dim)
        self.key = nn.Linear(dim, dim)
        self.value = nn.Linear(dim, dim)
        self.out = nn.Linear(dim, dim)
        self.drop = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, allowed: torch.Tensor) -> torch.Tensor:
        batch, length, dim = x.shape
        shape = (batch, length, self.heads, self.head_dim)
        q = self.query(x).view(shape).transpose(1, 2)
        k = self.key(x).view(shape).transpose(1, 2)
        v = self.value(x).view(shape).transpose(1, 2)
        scores = (q @ k.transpose(-1, -2)) / math.sqrt(self.head_dim)
        scores = scores.masked_fill(~allowed.unsqueeze(1), float("-inf"))
        weights = self.drop(torch.softmax(scores, dim=-1))
        context = (weights @ v).transpose(1, 2).reshape(batch, length, dim)
        return self.out(context)


class _EncoderLayer(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.attention = _SelfAttention(config.hidden_dim, config.heads, config.dropout)
        self.norm1 = nn.LayerNorm(config.hidden_dim)
        self.ffn_in = nn.Linear(config.hidden_dim, config.ffn_dim)
        self.ffn_out = nn.Linear(config.ffn_dim, config.hidden_dim)
        self.norm2 = nn.LayerNorm(config.hidden_dim)
        self.drop = nn.Dropout(config.dropout)

    def forward(self, x: torch.Tensor, allowed: torch.Tensor) -> torch.Tensor:
        x = self.norm1(x + self.drop(self.attention(x, allowed)))
        x = self.norm2(x + self.drop(self.ffn_out(F.gelu(self.ffn_in(x)))))
        return x


class ReadingOrderNet(nn.Module):
    """Encoder over a packed [begin, source, target] sequence.

    The per-position input embedding sums the active families (word embedding
    unless layout_only, four box-corner embeddings unless text_only, always
    the 1D position embedding) and layer-normalizes; begin slots use a learned
    vector in place of word and box content.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        dim = config.hidden_dim
        self.word_embedding = nn.Embedding(config.vocab_size, dim)
        self.x0_embedding = nn.Embedding(config.coord_grid + 1, dim)
        self.y0_embedding = nn.Embedding(config.coord_grid + 1, dim)
        self.x1_embedding = nn.Embedding(config.coord_grid + 1, dim)
        self.y1_embedding = nn.Embedding(config.coord_grid + 1, dim)
        self.position_embedding = nn.Embedding(config.max_positions, dim)
        self.begin_vector = nn.Parameter(torch.empty(dim))
        self.input_norm = nn.LayerNorm(dim)
        self.input_drop = nn.Dropout(config.dropout)
        self.layers = nn.ModuleList(_EncoderLayer(config) for _ in range(config.layers))
        # final projection; small init keeps the pointer dot products near zero
        # at the start of training despite layer-norm-scale hidden states
        self.output_proj = nn.Linear(dim, dim)
        self._init_weights()

    def _init_weights(self) -> None:
        nn.init.normal_(self.output_proj.weight, std=0.002)
        nn.init.zeros_(self.output_proj.bias)
        for table in (
            self.word_embedding,
            self.x0_embedding,
            self.y0_embedding,
            self.x1_embedding,
            self.y1_embedding,
            self.position_embedding,
        ):
            nn.init.normal_(table.weight, std=0.02)
        nn.init.normal_(self.begin_vector, std=0.02)

    def embed(
        self,
        word_ids: torch.Tensor,
        buckets: torch.Tensor,
        positions: torch.Tensor,
        is_begin: torch.Tensor,
    ) -> torch.Tensor:
        """Input embeddings (pre-dropout); also the pointer-head candidates."""
        mode = self.config.mode
        content = torch.zeros(
            (*word_ids.shape, self.config.hidden_dim),
            dtype=self.word_embedding.weight.dtype,
            device=word_ids.device,
        )
        if mode != "layout_only":
            content = content + self.word_embedding(word_ids)
        if mode != "text_only":
            content = (
                content
                + self.x0_embedding(buckets[..., 0])
                + self.y0_embedding(buckets[..., 1])
                + self.x1_embedding(buckets[..., 2])
                + self.y1_embedding(buckets[..., 3])
            )
        content = torch.where(is_begin.unsqueeze(-1), self.begin_vector, content)
        return self.input_norm(content + self.position_embedding(positions))

    def forward(
        self,
        word_ids: torch.Tensor,
        buckets: torch.Tensor,
        positions: torch.Tensor,
        is_begin: torch.Tensor,
        allowed: torch.Tensor,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Returns (final hidden states, input embeddings), both (B, L, D)."""
        embeddings = self.embed(word_ids, buckets, positions, is_begin)
        x = self.input_drop(embeddings)
        for layer in self.layers:
            x = layer(x, allowed)
        return self.output_proj(x), embeddings
