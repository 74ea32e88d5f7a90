"""Deterministic synthetic page generator with gold reading order and line boxes.

Pages come in four layout families. Column layouts are read column-major (the
whole left column top to bottom, then the next); tables are read cell by cell,
each cell fully before the next. Rows of different columns share the same
vertical grid, so the left-to-right/top-to-bottom heuristic interleaves them
and multi-column pages are genuinely hard for it.

Generation is keyed by (seed, page ordinal): any page can be produced
independently and in parallel with bit-identical results.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import partial
from typing import Sequence

from .adaptation import LineBox
from .core import BBox, DataError, Page, Token, appearance_indices
from .metrics import parallel_map

LAYOUT_KINDS = ("single_column", "two_column", "three_column", "table")

DEFAULT_VOCAB = (
    "the", "and", "for", "total", "amount", "date", "name", "value", "number",
    "report", "column", "row", "cell", "title", "section", "figure", "index",
    "item", "code", "unit", "price", "tax", "sum", "note", "label", "field",
    "data", "model", "page", "text", "line", "word", "order", "table", "form",
    "invoice", "entry", "file", "list", "sign", "mark", "scan", "read", "token",
    "char", "box", "net", "due",
)


class GeometryError(DataError):
    """The requested token count cannot be typeset on the page."""


@dataclass(frozen=True, slots=True)
class GenSpec:
    layout_kind: str = "mixed"
    tokens_min: int = 50
    tokens_max: int = 60
    page_width: int = 1000
    page_height: int = 1414
    font_height: int = 20
    column_gap: int = 40
    word_vocab: tuple[str, ...] = DEFAULT_VOCAB
    seed: int = 0

    def __post_init__(self) -> None:
        if self.layout_kind != "mixed" and self.layout_kind not in LAYOUT_KINDS:
            raise DataError(
                f"layout_kind must be 'mixed' or one of {LAYOUT_KINDS}, got {self.layout_kind!r}"
            )
        if not 1 <= self.tokens_min <= self.tokens_max:
            raise DataError(
                f"need 1 <= tokens_min <= tokens_max, got {self.tokens_min}..{self.tokens_max}"
            )
        if self.page_width <= 0 or self.page_height <= 0:
            raise DataError("page dimensions must be positive")
        if self.font_height < 4:
            raise DataError("font_height must be at least 4")
        if self.column_gap < 1:
            raise DataError("column_gap must be positive")
        if not self.word_vocab:
            raise DataError("word_vocab must be non-empty")
        object.__setattr__(self, "word_vocab", tuple(self.word_vocab))


class _WordSampler:
    """Zipf-weighted word draws, so repeated words (appearance index > 0) occur."""

    def __init__(self, vocab: Sequence[str], rng: random.Random):
        self._vocab = list(vocab)
        self._cum_weights = []
        total = 0.0
        for rank in range(len(vocab)):
            total += 1.0 / (rank + 1)
            self._cum_weights.append(total)
        self._rng = rng

    def draw(self) -> str:
        return self._rng.choices(self._vocab, cum_weights=self._cum_weights, k=1)[0]


def _split_even(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def _fill_column(
    sampler: _WordSampler,
    rng: random.Random,
    quota: int,
    x_left: int,
    x_right: int,
    y_top: int,
    y_limit: int,
    font_height: int,
    pitch: int,
    char_width: int,
    words_lo: int,
    words_hi: int,
) -> tuple[list[tuple[str, BBox]], list[BBox]]:
    """Typeset ``quota`` words into one column; returns (words, row boxes)."""
    words: list[tuple[str, BBox]] = []
    rows: list[BBox] = []
    y = y_top
    while quota > 0:
        if y + font_height > y_limit:
            raise GeometryError(
                f"column overflow: {quota} words left below y={y} (limit {y_limit})"
            )
        target = min(rng.randint(words_lo, words_hi), quota)
        x = x_left
        row_words: list[tuple[str, BBox]] = []
        for _ in range(target):
            word = sampler.draw()
            width = len(word) * char_width
            if x + width > x_right and row_words:
                break
            row_words.append((word, BBox(x, y, x + width, y + font_height)))
            x += width + char_width
        words.extend(row_words)
        quota -= len(row_words)
        rows.append(
            BBox(row_words[0][1].x0, y, row_words[-1][1].x1, y + font_height)
        )
        y += pitch
    return words, rows


def _columns_page(
    spec: GenSpec, rng: random.Random, n_tokens: int, n_cols: int
) -> tuple[list[tuple[str, BBox]], list[BBox]]:
    # fixed margins and leading keep pages on a shared coordinate lattice
    margin_x = 60
    margin_y = 60
    pitch = spec.font_height + spec.font_height // 2
    char_width = max(2, (spec.font_height * 3) // 5)
    usable = spec.page_width - 2 * margin_x - (n_cols - 1) * spec.column_gap
    col_width = usable // n_cols
    longest = max(len(w) for w in spec.word_vocab)
    if col_width < longest * char_width:
        raise GeometryError(
            f"column width {col_width} cannot fit the longest vocabulary word"
        )
    words_lo, words_hi = (3, 6) if n_cols == 1 else (2, 4)
    words: list[tuple[str, BBox]] = []
    lines: list[BBox] = []
    sampler = _WordSampler(spec.word_vocab, rng)
    for col, quota in enumerate(_split_even(n_tokens, n_cols)):
        if quota == 0:
            continue
        x_left = margin_x + col * (col_width + spec.column_gap)
        col_words, col_lines = _fill_column(
            sampler, rng, quota,
            x_left, x_left + col_width,
            margin_y, spec.page_height - margin_y,
            spec.font_height, pitch, char_width, words_lo, words_hi,
        )
        words.extend(col_words)
        lines.extend(col_lines)
    return words, lines


def _table_page(
    spec: GenSpec, rng: random.Random, n_tokens: int
) -> tuple[list[tuple[str, BBox]], list[BBox]]:
    margin_x = 60
    margin_y = 60
    pitch = spec.font_height + spec.font_height // 2
    char_width = max(2, (spec.font_height * 3) // 5)
    n_cols = rng.randint(2, 3)
    usable = spec.page_width - 2 * margin_x - (n_cols - 1) * spec.column_gap
    col_width = usable // n_cols
    longest = max(len(w) for w in spec.word_vocab)
    if col_width < 2 * longest * char_width + char_width:
        raise GeometryError(f"table cell width {col_width} too narrow for two words")
    sampler = _WordSampler(spec.word_vocab, rng)
    words: list[tuple[str, BBox]] = []
    lines: list[BBox] = []
    quota = n_tokens
    y = margin_y
    # the gap between rows separates them visibly from the line pitch inside a
    # cell, otherwise stacked one-line rows would be indistinguishable from a
    # single row of two-line cells
    row_gap = max(2, spec.font_height // 2)
    while quota > 0:
        # all cells of a row share a line count; rows with two lines are the
        # ones where cell-by-cell reading diverges from plain row-major
        lines_in_row = rng.randint(1, 2)
        row_height = lines_in_row * pitch
        if y + row_height - (pitch - spec.font_height) > spec.page_height - margin_y:
            raise GeometryError(f"table overflow: {quota} words left below y={y}")
        for col in range(n_cols):
            x_left = margin_x + col * (col_width + spec.column_gap)
            for line_no in range(lines_in_row):
                if quota <= 0:
                    break
                line_y = y + line_no * pitch
                x = x_left
                line_words: list[tuple[str, BBox]] = []
                for _ in range(min(rng.randint(1, 2), quota)):
                    word = sampler.draw()
                    width = len(word) * char_width
                    line_words.append(
                        (word, BBox(x, line_y, x + width, line_y + spec.font_height))
                    )
                    x += width + char_width
                words.extend(line_words)
                quota -= len(line_words)
                lines.append(
                    BBox(
                        line_words[0][1].x0, line_y,
                        line_words[-1][1].x1, line_y + spec.font_height,
                    )
                )
            if quota <= 0:
                break
        y += row_height + row_gap
    return words, lines


def generate_page(spec: GenSpec, ordinal: int) -> tuple[Page, list[LineBox]]:
    """Generate one page; deterministic in (spec.seed, ordinal)."""
    rng = random.Random(spec.seed * 1_000_003 + ordinal)
    kind = spec.layout_kind
    if kind == "mixed":
        kind = rng.choice(LAYOUT_KINDS)
    n_tokens = rng.randint(spec.tokens_min, spec.tokens_max)
    if kind == "single_column":
        words, line_boxes = _columns_page(spec, rng, n_tokens, 1)
    elif kind == "two_column":
        words, line_boxes = _columns_page(spec, rng, n_tokens, 2)
    elif kind == "three_column":
        words, line_boxes = _columns_page(spec, rng, n_tokens, 3)
    else:
        words, line_boxes = _table_page(spec, rng, n_tokens)
    page_id = f"{kind}-{spec.seed}-{ordinal:05d}"
    indices = appearance_indices([w for w, _ in words])
    tokens = tuple(
        Token(word=w, bbox=box, appearance_index=idx)
        for (w, box), idx in zip(words, indices)
    )
    page = Page(id=page_id, width=spec.page_width, height=spec.page_height, tokens=tokens)
    lines = [
        LineBox(bbox=box, line_id=f"{page_id}-l{k:03d}")
        for k, box in enumerate(line_boxes)
    ]
    return page, lines


def generate(spec: GenSpec, count: int, jobs: int = 1) -> list[tuple[Page, list[LineBox]]]:
    """Generate ``count`` pages; output is independent of ``jobs``."""
    if count < 1:
        raise DataError(f"count must be positive, got {count}")
    return parallel_map(partial(generate_page, spec), list(range(count)), jobs=jobs)
