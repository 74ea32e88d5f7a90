"""Autoregressive decoding: constrained/unconstrained, greedy or beam search.

Decoding re-runs the encoder over the growing packed sequence each step;
pages are batched for throughput and each page's computation is independent
of its batch neighbours.
"""

from __future__ import annotations

import random
from typing import Sequence

import numpy as np
import torch

from ..core import DataError, OrderPrediction, Page
from ..heuristic import heuristic_order
from .network import ReadingOrderNet, pointer_logits
from .packing import SourcePack, pack_source

INPUT_ORDERS = ("heuristic", "shuffled", "gold")


def _arrangements(
    pages: Sequence[Page], input_order: str | Sequence[Sequence[int]], seed: int
) -> list[list[int]]:
    if not isinstance(input_order, str):
        if len(input_order) != len(pages):
            raise DataError("one arrangement per page is required")
        return [list(a) for a in input_order]
    if input_order == "heuristic":
        return [heuristic_order(page.tokens) for page in pages]
    if input_order == "gold":
        return [list(range(len(page))) for page in pages]
    if input_order == "shuffled":
        rng = random.Random(seed)
        out = []
        for page in pages:
            perm = list(range(len(page)))
            rng.shuffle(perm)
            out.append(perm)
        return out
    raise DataError(f"input_order must be one of {INPUT_ORDERS}, got {input_order!r}")


def _decode_group(
    net: ReadingOrderNet,
    sources: list[SourcePack],
    constrained: bool,
    beam_width: int,
) -> list[list[int]]:
    """Beam-decode a group of pages; returns per-page source-slot sequences."""
    dtype = next(net.parameters()).dtype
    max_n = max(src.n for src in sources)
    beams: list[list[tuple[float, tuple[int, ...]]]] = [[(0.0, ())] for _ in sources]
    for step in range(max_n):
        active = [i for i, src in enumerate(sources) if src.n > step]
        rows = [(i, b) for i in active for b in range(len(beams[i]))]
        s_width = 1 + max(sources[i].n for i in active)
        t_width = step + 1
        total = s_width + t_width
        count = len(rows)
        word_ids = np.zeros((count, total), dtype=np.int64)
        buckets = np.zeros((count, total, 4), dtype=np.int64)
        positions = np.zeros((count, total), dtype=np.int64)
        is_begin = np.zeros((count, total), dtype=bool)
        allowed = np.zeros((count, total, total), dtype=bool)
        allowed[:, :, 0] = True
        tri = np.tril(np.ones((t_width, t_width), dtype=bool))
        for r, (i, b) in enumerate(rows):
            src = sources[i]
            ns = 1 + src.n
            word_ids[r, 1:ns] = src.word_ids
            buckets[r, 1:ns] = src.buckets
            positions[r, :ns] = np.arange(ns)
            is_begin[r, 0] = True
            is_begin[r, s_width] = True
            prefix = beams[i][b][1]
            for j, slot in enumerate(prefix):
                word_ids[r, s_width + 1 + j] = src.word_ids[slot]
                buckets[r, s_width + 1 + j] = src.buckets[slot]
            positions[r, s_width : s_width + t_width] = ns + np.arange(t_width)
            allowed[r, :ns, :ns] = True
            allowed[r, s_width : s_width + t_width, :ns] = True
            allowed[r, s_width : s_width + t_width, s_width : s_width + t_width] = tri
        hidden, embeddings = net(
            torch.from_numpy(word_ids),
            torch.from_numpy(buckets),
            torch.from_numpy(positions),
            torch.from_numpy(is_begin),
            torch.from_numpy(allowed),
        )
        last_hidden = hidden[:, s_width + step]
        source_emb = embeddings[:, 1:s_width]
        logits = pointer_logits(last_hidden.unsqueeze(1), source_emb).squeeze(1)
        neg_inf = torch.tensor(float("-inf"), dtype=dtype)
        for r, (i, b) in enumerate(rows):
            logits[r, sources[i].n :] = neg_inf
            if constrained:
                for slot in beams[i][b][1]:
                    logits[r, slot] = neg_inf
        log_probs = torch.log_softmax(logits, dim=-1)
        row_of = {(i, b): r for r, (i, b) in enumerate(rows)}
        for i in active:
            candidates: list[tuple[float, tuple[int, ...]]] = []
            for b, (score, prefix) in enumerate(beams[i]):
                row_scores = log_probs[row_of[(i, b)]]
                top = torch.topk(row_scores, min(beam_width, row_scores.shape[0]))
                for value, slot in zip(top.values.tolist(), top.indices.tolist()):
                    if value == float("-inf"):
                        continue
                    candidates.append((score + value, prefix + (slot,)))
            if not candidates:
                raise DataError(f"page {sources[i].page_id!r}: no decode candidates left")
            candidates.sort(key=lambda c: (-c[0], c[1]))
            beams[i] = candidates[:beam_width]
    return [list(page_beams[0][1]) for page_beams in beams]


def decode_pages(
    net: ReadingOrderNet,
    pages: Sequence[Page],
    *,
    constrained: bool = True,
    beam_width: int = 1,
    input_order: str | Sequence[Sequence[int]] = "heuristic",
    seed: int = 0,
    batch_size: int = 32,
) -> list[OrderPrediction]:
    """Emit one source index per step for each page (a permutation if constrained).

    ``input_order`` controls how source tokens are presented: the reading
    baseline order, a seeded shuffle, the gold order, or explicit per-page
    arrangements. Predictions are mapped back to original token indices.
    """
    if beam_width < 1:
        raise DataError(f"beam_width must be >= 1, got {beam_width}")
    if batch_size < 1:
        raise DataError(f"batch_size must be >= 1, got {batch_size}")
    arrangements = _arrangements(pages, input_order, seed)
    net.eval()
    predictions = []
    with torch.no_grad():
        for start in range(0, len(pages), batch_size):
            chunk = list(range(start, min(start + batch_size, len(pages))))
            sources = [pack_source(pages[i], net.config, arrangements[i]) for i in chunk]
            slot_sequences = _decode_group(net, sources, constrained, beam_width)
            for src, slots in zip(sources, slot_sequences):
                predictions.append(
                    OrderPrediction(
                        page_id=src.page_id,
                        indices=tuple(src.source_order[s] for s in slots),
                    )
                )
    return predictions


def decode_page(net: ReadingOrderNet, page: Page, **kwargs) -> OrderPrediction:
    return decode_pages(net, [page], **kwargs)[0]
