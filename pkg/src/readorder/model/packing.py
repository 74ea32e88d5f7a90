"""Packing a page into a source+target training sequence with its attention mask.

The packed layout is [begin, source tokens..., target slots...]. The begin
slot belongs to the source segment. Target slot k carries the word and box of
the token placed at step k-1 (the begin vector at step 0) plus a 1D position
that continues the packed index, and the model predicts, at every slot, the
source position of the next token in the reading order.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import BBox, DataError, Page
from .config import ModelConfig


def build_mask(n_src: int, n_tgt: int) -> np.ndarray:
    """Attention visibility over a packed sequence of n_src + n_tgt positions.

    M[i, j] is True iff j is a source position, or i and j are both target
    positions with j <= i: the source segment is mutually visible but blind to
    the target segment, and the target segment additionally sees itself
    causally.
    """
    if n_src < 1:
        raise DataError(f"build_mask needs n_src >= 1, got {n_src}")
    if n_tgt < 0:
        raise DataError(f"build_mask needs n_tgt >= 0, got {n_tgt}")
    size = n_src + n_tgt
    mask = np.zeros((size, size), dtype=bool)
    mask[:, :n_src] = True
    if n_tgt:
        mask[n_src:, n_src:] = np.tril(np.ones((n_tgt, n_tgt), dtype=bool))
    return mask


def hash_word_id(word: str, vocab_size: int) -> int:
    """Stable hash of a whitespace token into [1, vocab_size); 0 is reserved."""
    return zlib.crc32(word.encode("utf-8")) % (vocab_size - 1) + 1


def bbox_buckets(bbox: BBox, page_width: int, page_height: int, grid: int) -> tuple[int, int, int, int]:
    """Normalize box corners onto the embedding grid via floor(c * grid / extent)."""
    if bbox.x1 > page_width or bbox.y1 > page_height:
        raise DataError(f"bbox {bbox.as_list()} exceeds page {page_width}x{page_height}")
    return (
        bbox.x0 * grid // page_width,
        bbox.y0 * grid // page_height,
        bbox.x1 * grid // page_width,
        bbox.y1 * grid // page_height,
    )


@dataclass(frozen=True)
class SourcePack:
    """Per-page model inputs for the source segment, in presentation order."""

    page_id: str
    n: int
    source_order: tuple[int, ...]  # source slot -> original token index
    word_ids: np.ndarray  # (n,)
    buckets: np.ndarray  # (n, 4)


@dataclass(frozen=True)
class PackedSequence:
    """A page packed for teacher-forced training.

    Arrays cover the contiguous layout [begin, src, tgt]; ``targets[k]`` is the
    source slot holding the k-th token of the gold reading order.
    """

    page_id: str
    n_src: int
    n_tgt: int
    source_order: tuple[int, ...]
    word_ids: np.ndarray  # (1 + n_src + n_tgt,)
    buckets: np.ndarray  # (1 + n_src + n_tgt, 4)
    positions: np.ndarray  # (1 + n_src + n_tgt,)
    is_begin: np.ndarray  # (1 + n_src + n_tgt,) bool
    targets: np.ndarray  # (n_tgt,)

    def mask(self) -> np.ndarray:
        return build_mask(1 + self.n_src, self.n_tgt)


def pack_source(page: Page, config: ModelConfig, arrangement: Sequence[int]) -> SourcePack:
    """Arrange a page's tokens for the source segment."""
    n = len(page)
    if n > config.max_tokens_per_page:
        raise DataError(
            f"page {page.id!r} has {n} tokens, over the {config.max_tokens_per_page} limit;"
            " refusing to truncate"
        )
    if sorted(arrangement) != list(range(n)):
        raise DataError(f"page {page.id!r}: arrangement is not a permutation of [0, {n})")
    word_ids = np.empty(n, dtype=np.int64)
    buckets = np.empty((n, 4), dtype=np.int64)
    for slot, token_idx in enumerate(arrangement):
        token = page.tokens[token_idx]
        word_ids[slot] = hash_word_id(token.word, config.vocab_size)
        buckets[slot] = bbox_buckets(token.bbox, page.width, page.height, config.coord_grid)
    return SourcePack(
        page_id=page.id,
        n=n,
        source_order=tuple(arrangement),
        word_ids=word_ids,
        buckets=buckets,
    )


def pack_training(page: Page, config: ModelConfig, arrangement: Sequence[int]) -> PackedSequence:
    """Teacher-forced pack: every gold step becomes a target slot."""
    src = pack_source(page, config, arrangement)
    n = src.n
    # targets[k]: where the k-th gold token sits in the source arrangement
    inverse = np.empty(n, dtype=np.int64)
    for slot, token_idx in enumerate(src.source_order):
        inverse[token_idx] = slot
    length = 1 + 2 * n
    word_ids = np.zeros(length, dtype=np.int64)
    buckets = np.zeros((length, 4), dtype=np.int64)
    is_begin = np.zeros(length, dtype=bool)
    is_begin[0] = True
    word_ids[1 : 1 + n] = src.word_ids
    buckets[1 : 1 + n] = src.buckets
    # slot k >= 1 re-presents the gold token k-1; slot 0 holds the begin vector
    is_begin[1 + n] = True
    for k in range(1, n):
        gold_slot = inverse[k - 1]
        word_ids[1 + n + k] = src.word_ids[gold_slot]
        buckets[1 + n + k] = src.buckets[gold_slot]
    return PackedSequence(
        page_id=page.id,
        n_src=n,
        n_tgt=n,
        source_order=src.source_order,
        word_ids=word_ids,
        buckets=buckets,
        positions=np.arange(length, dtype=np.int64),
        is_begin=is_begin,
        targets=inverse,
    )
