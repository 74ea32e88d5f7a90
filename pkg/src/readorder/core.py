"""Core domain types: tokens, pages, order predictions, and the JSONL dataset format.

All types are immutable after construction and validate their invariants in
``__post_init__``, so any instance in the system is known to be well-formed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence


class DataError(ValueError):
    """Input data violates a schema or a domain invariant."""


class AlignmentError(DataError):
    """Two token streams cannot be matched one-to-one."""


@dataclass(frozen=True, slots=True)
class BBox:
    """Axis-aligned box in page units, left-top corner (x0, y0) to right-bottom (x1, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self) -> None:
        for name in ("x0", "y0", "x1", "y1"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise DataError(f"bbox coordinate {name} must be an int, got {value!r}")
            if value < 0:
                raise DataError(f"bbox coordinate {name} must be >= 0, got {value}")
        if self.x0 > self.x1:
            raise DataError(f"bbox requires x0 <= x1, got {self.x0} > {self.x1}")
        if self.y0 > self.y1:
            raise DataError(f"bbox requires y0 <= y1, got {self.y0} > {self.y1}")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def intersection_area(self, other: "BBox") -> int:
        """Area of the rectangle intersection, 0 when disjoint."""
        dx = min(self.x1, other.x1) - max(self.x0, other.x0)
        dy = min(self.y1, other.y1) - max(self.y0, other.y0)
        if dx <= 0 or dy <= 0:
            return 0
        return dx * dy

    def shifted(self, dx: int, dy: int) -> "BBox":
        return BBox(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)

    def as_list(self) -> list[int]:
        return [self.x0, self.y0, self.x1, self.y1]


@dataclass(frozen=True, slots=True)
class Token:
    """A word with its box and appearance index (count of prior same-word occurrences)."""

    word: str
    bbox: BBox
    appearance_index: int

    def __post_init__(self) -> None:
        if not self.word:
            raise DataError("token word must be non-empty")
        if not isinstance(self.appearance_index, int) or self.appearance_index < 0:
            raise DataError(
                f"appearance_index must be a non-negative int, got {self.appearance_index!r}"
            )

    @property
    def key(self) -> tuple[str, int]:
        """(word, appearance_index), unique within a page."""
        return (self.word, self.appearance_index)


@dataclass(frozen=True, slots=True)
class Page:
    """A page of tokens whose list order is the gold reading order."""

    id: str
    width: int
    height: int
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise DataError(f"page dimensions must be positive, got {self.width}x{self.height}")
        tokens = tuple(self.tokens)
        object.__setattr__(self, "tokens", tokens)
        if not tokens:
            raise DataError(f"page {self.id!r} has no tokens")
        seen: dict[str, int] = {}
        for pos, token in enumerate(tokens):
            box = token.bbox
            if box.x1 > self.width or box.y1 > self.height:
                raise DataError(
                    f"page {self.id!r}: token {pos} bbox {box.as_list()} exceeds "
                    f"page bounds {self.width}x{self.height}"
                )
            expected = seen.get(token.word, 0)
            if token.appearance_index != expected:
                raise DataError(
                    f"page {self.id!r}: token {pos} ({token.word!r}) has appearance_index "
                    f"{token.appearance_index}, expected {expected} from reading order"
                )
            seen[token.word] = expected + 1

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True, slots=True)
class OrderPrediction:
    """Predicted reading order as indices into a page's token list."""

    page_id: str
    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(self.indices))
        for idx in self.indices:
            if not isinstance(idx, int) or idx < 0:
                raise DataError(f"prediction index must be a non-negative int, got {idx!r}")

    def validate_against(self, page: Page) -> None:
        if self.page_id != page.id:
            raise DataError(f"prediction is for page {self.page_id!r}, not {page.id!r}")
        n = len(page)
        for idx in self.indices:
            if idx >= n:
                raise DataError(
                    f"page {page.id!r}: prediction index {idx} out of range for {n} tokens"
                )


def appearance_indices(words: Sequence[str]) -> list[int]:
    """Per-word duplicate counters for a word sequence in reading order."""
    seen: dict[str, int] = {}
    out = []
    for word in words:
        idx = seen.get(word, 0)
        out.append(idx)
        seen[word] = idx + 1
    return out


def permutation_from_layout_order(page: Page, layout_tokens: Sequence[Token]) -> list[int]:
    """Map gold positions to positions in a physically-ordered token list.

    Returns ``p`` such that ``layout_tokens[p[k]] == page.tokens[k]`` for all k,
    matching tokens by their (word, appearance_index) key.
    """
    if len(layout_tokens) != len(page.tokens):
        raise AlignmentError(
            f"page {page.id!r}: layout has {len(layout_tokens)} tokens, page has {len(page.tokens)}"
        )
    by_key: dict[tuple[str, int], int] = {}
    for pos, token in enumerate(layout_tokens):
        if token.key in by_key:
            raise AlignmentError(f"page {page.id!r}: duplicate layout key {token.key!r}")
        by_key[token.key] = pos
    perm = []
    for token in page.tokens:
        pos = by_key.get(token.key)
        if pos is None:
            raise AlignmentError(f"page {page.id!r}: no layout token for key {token.key!r}")
        perm.append(pos)
    return perm


# --- JSONL dataset format -------------------------------------------------
#
# One page per line, arrays index-aligned, array order is the gold reading order:
# {"id": str, "width": int, "height": int, "words": [str],
#  "bboxes": [[x0, y0, x1, y1]], "appearance_indices": [int]}


def page_to_dict(page: Page) -> dict:
    return {
        "id": page.id,
        "width": page.width,
        "height": page.height,
        "words": [t.word for t in page.tokens],
        "bboxes": [t.bbox.as_list() for t in page.tokens],
        "appearance_indices": [t.appearance_index for t in page.tokens],
    }


def page_from_dict(data: dict) -> Page:
    try:
        words = data["words"]
        bboxes = data["bboxes"]
        app = data["appearance_indices"]
        page_id = data["id"]
        width = data["width"]
        height = data["height"]
    except (KeyError, TypeError) as exc:
        raise DataError(f"page record missing field: {exc}") from exc
    if not (len(words) == len(bboxes) == len(app)):
        raise DataError(
            f"page {page_id!r}: words/bboxes/appearance_indices lengths differ "
            f"({len(words)}/{len(bboxes)}/{len(app)})"
        )
    tokens = []
    for word, box, idx in zip(words, bboxes, app):
        if not isinstance(box, (list, tuple)) or len(box) != 4:
            raise DataError(f"page {page_id!r}: bbox must be a 4-list, got {box!r}")
        tokens.append(Token(word=word, bbox=BBox(*box), appearance_index=idx))
    return Page(id=page_id, width=width, height=height, tokens=tuple(tokens))


def _read_jsonl(path: str) -> Iterable[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise DataError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, record


def read_pages(path: str) -> list[Page]:
    pages = []
    for lineno, record in _read_jsonl(path):
        try:
            pages.append(page_from_dict(record))
        except DataError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
    if not pages:
        raise DataError(f"{path}: no pages found")
    return pages


def write_pages(path: str, pages: Iterable[Page]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for page in pages:
            handle.write(json.dumps(page_to_dict(page), ensure_ascii=False))
            handle.write("\n")


def read_predictions(path: str) -> list[OrderPrediction]:
    preds = []
    for lineno, record in _read_jsonl(path):
        try:
            preds.append(
                OrderPrediction(page_id=record["page_id"], indices=tuple(record["indices"]))
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"{path}:{lineno}: bad prediction record: {exc}") from exc
    return preds


def write_predictions(path: str, predictions: Iterable[OrderPrediction]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for pred in predictions:
            record = {"page_id": pred.page_id, "indices": list(pred.indices)}
            handle.write(json.dumps(record, ensure_ascii=False))
            handle.write("\n")
