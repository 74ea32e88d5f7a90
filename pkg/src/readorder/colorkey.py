"""Appearance-index coloring and the sequence/layout stream alignment.

Duplicate words on a page are told apart by their appearance index. The index
is carried across formats as an RGB color: the standard byte-field layout
``r = (i >> 16) & 0xFF, g = (i >> 8) & 0xFF, b = i & 0xFF`` is a bijection on
[0, 2^24), so ``(word, color)`` is a unique join key between a reading-ordered
word stream and a physically-ordered layout stream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import AlignmentError, BBox, DataError, Page, Token

MAX_INDEX = 1 << 24


@dataclass(frozen=True, slots=True)
class Rgb:
    r: int
    g: int
    b: int

    def __post_init__(self) -> None:
        for name in ("r", "g", "b"):
            value = getattr(self, name)
            if not isinstance(value, int) or not 0 <= value <= 255:
                raise DataError(f"color channel {name} must be in [0, 255], got {value!r}")

    def as_list(self) -> list[int]:
        return [self.r, self.g, self.b]


@dataclass(frozen=True, slots=True)
class SequenceRecord:
    """One word of the reading-ordered stream."""

    word: str
    appearance_index: int

    def __post_init__(self) -> None:
        if not self.word:
            raise DataError("sequence record word must be non-empty")
        if not isinstance(self.appearance_index, int) or self.appearance_index < 0:
            raise DataError(
                f"appearance_index must be a non-negative int, got {self.appearance_index!r}"
            )


@dataclass(frozen=True, slots=True)
class LayoutRecord:
    """One word of the physically-ordered stream: word, color, box, page size."""

    word: str
    color: Rgb
    bbox: BBox
    page_width: int
    page_height: int

    def __post_init__(self) -> None:
        if not self.word:
            raise DataError("layout record word must be non-empty")
        if self.page_width <= 0 or self.page_height <= 0:
            raise DataError(
                f"layout record page size must be positive, got "
                f"{self.page_width}x{self.page_height}"
            )
        if self.bbox.x1 > self.page_width or self.bbox.y1 > self.page_height:
            raise DataError(
                f"layout record bbox {self.bbox.as_list()} exceeds page "
                f"{self.page_width}x{self.page_height}"
            )


def encode_index(i: int) -> Rgb:
    """Color for appearance index ``i``; injective on [0, 2^24)."""
    if not isinstance(i, int) or i < 0:
        raise DataError(f"appearance index must be a non-negative int, got {i!r}")
    if i >= MAX_INDEX:
        raise DataError(f"appearance index {i} out of color range [0, 2^24)")
    return Rgb((i >> 16) & 0xFF, (i >> 8) & 0xFF, i & 0xFF)


def decode_color(color: Rgb) -> int:
    """Inverse of encode_index; total on Rgb."""
    return (color.r << 16) | (color.g << 8) | color.b


def align(seq: Sequence[SequenceRecord], layout: Sequence[LayoutRecord]) -> list[Token]:
    """One-to-one match of a reading-ordered stream against a layout stream.

    A sequence record (word, i) matches the unique layout record with the same
    word and color encode_index(i). Returns tokens in sequence order, each
    carrying the bbox of its match. The result does not depend on the order of
    the layout stream.
    """
    if len(seq) != len(layout):
        raise AlignmentError(
            f"stream length mismatch: {len(seq)} sequence records vs {len(layout)} layout records"
        )
    by_key: dict[tuple[str, int], LayoutRecord] = {}
    for record in layout:
        key = (record.word, decode_color(record.color))
        if key in by_key:
            raise AlignmentError(f"duplicate layout record for {key!r}")
        by_key[key] = record
    seen: set[tuple[str, int]] = set()
    tokens = []
    for record in seq:
        key = (record.word, record.appearance_index)
        if key in seen:
            raise AlignmentError(f"duplicate sequence record for {key!r}")
        seen.add(key)
        match = by_key.get(key)
        if match is None:
            raise AlignmentError(f"no layout record matches {key!r}")
        tokens.append(
            Token(word=record.word, bbox=match.bbox, appearance_index=record.appearance_index)
        )
    return tokens


def align_page(page_id: str, seq: Sequence[SequenceRecord], layout: Sequence[LayoutRecord]) -> Page:
    """Align the two streams of one page and assemble the Page."""
    if not layout:
        raise AlignmentError(f"page {page_id!r}: empty layout stream")
    widths = {r.page_width for r in layout}
    heights = {r.page_height for r in layout}
    if len(widths) != 1 or len(heights) != 1:
        raise DataError(f"page {page_id!r}: inconsistent page dimensions in layout stream")
    try:
        tokens = align(seq, layout)
    except AlignmentError as exc:
        raise AlignmentError(f"page {page_id!r}: {exc}") from exc
    return Page(id=page_id, width=widths.pop(), height=heights.pop(), tokens=tuple(tokens))


# --- Record stream converters and JSONL formats ----------------------------
#
# seq stream:    {"page_id": str, "word": str, "appearance_index": int}
# layout stream: {"page_id": str, "word": str, "color": [r, g, b],
#                 "bbox": [x0, y0, x1, y1], "page_width": int, "page_height": int}
#
# Sequence lines of one page appear in reading order; layout lines may appear
# in any order.


def page_to_sequence_records(page: Page) -> list[SequenceRecord]:
    return [SequenceRecord(t.word, t.appearance_index) for t in page.tokens]


def page_to_layout_records(page: Page, order: Sequence[int] | None = None) -> list[LayoutRecord]:
    """Layout stream for a page, optionally re-ordered by ``order`` (indices into tokens)."""
    positions = range(len(page.tokens)) if order is None else order
    records = []
    for pos in positions:
        token = page.tokens[pos]
        records.append(
            LayoutRecord(
                word=token.word,
                color=encode_index(token.appearance_index),
                bbox=token.bbox,
                page_width=page.width,
                page_height=page.height,
            )
        )
    return records


def write_sequence_stream(path: str, pages_records: Iterable[tuple[str, Sequence[SequenceRecord]]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for page_id, records in pages_records:
            for record in records:
                line = {
                    "page_id": page_id,
                    "word": record.word,
                    "appearance_index": record.appearance_index,
                }
                handle.write(json.dumps(line, ensure_ascii=False))
                handle.write("\n")


def write_layout_stream(path: str, pages_records: Iterable[tuple[str, Sequence[LayoutRecord]]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for page_id, records in pages_records:
            for record in records:
                line = {
                    "page_id": page_id,
                    "word": record.word,
                    "color": record.color.as_list(),
                    "bbox": record.bbox.as_list(),
                    "page_width": record.page_width,
                    "page_height": record.page_height,
                }
                handle.write(json.dumps(line, ensure_ascii=False))
                handle.write("\n")


def read_sequence_stream(path: str) -> dict[str, list[SequenceRecord]]:
    """Group sequence records by page id, preserving first-seen page order."""
    from .core import _read_jsonl

    pages: dict[str, list[SequenceRecord]] = {}
    for lineno, record in _read_jsonl(path):
        try:
            pages.setdefault(record["page_id"], []).append(
                SequenceRecord(word=record["word"], appearance_index=record["appearance_index"])
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"{path}:{lineno}: bad sequence record: {exc}") from exc
    return pages


def read_layout_stream(path: str) -> dict[str, list[LayoutRecord]]:
    """Group layout records by page id, preserving first-seen page order."""
    from .core import _read_jsonl

    pages: dict[str, list[LayoutRecord]] = {}
    for lineno, record in _read_jsonl(path):
        try:
            color = record["color"]
            box = record["bbox"]
            pages.setdefault(record["page_id"], []).append(
                LayoutRecord(
                    word=record["word"],
                    color=Rgb(*color),
                    bbox=BBox(*box),
                    page_width=record["page_width"],
                    page_height=record["page_height"],
                )
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"{path}:{lineno}: bad layout record: {exc}") from exc
    return pages


def align_streams(
    seq_pages: dict[str, list[SequenceRecord]],
    layout_pages: dict[str, list[LayoutRecord]],
) -> list[Page]:
    """Align per-page record groups; page order follows the sequence stream."""
    missing = set(seq_pages) ^ set(layout_pages)
    if missing:
        raise AlignmentError(f"pages present on only one side: {sorted(missing)!r}")
    return [
        align_page(page_id, seq_pages[page_id], layout_pages[page_id]) for page_id in seq_pages
    ]
