"""Extending a token-level order to OCR text lines.

Each token is assigned to the line box with the largest rectangle-intersection
area (nearest line center as a fallback for stray tokens), and lines are then
ranked by the earliest position of any member token in the given token order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import BBox, DataError, Token


@dataclass(frozen=True, slots=True)
class LineBox:
    """An OCR text line: box, identifier, and optionally the recognized text."""

    bbox: BBox
    line_id: str
    text: str | None = None

    def __post_init__(self) -> None:
        if not self.line_id:
            raise DataError("line_id must be non-empty")


def assign_tokens(tokens: Sequence[Token], lines: Sequence[LineBox]) -> dict[str, list[int]]:
    """Map line_id -> member token indices, assigning each token to one line.

    The winning line maximizes intersection area with the token box; a token
    overlapping no line goes to the line with the nearest center. Ties keep
    the earliest line in input order. The returned dict lists every line in
    input order, members in token input order.
    """
    if not lines:
        raise DataError("token assignment needs at least one line")
    ids = [line.line_id for line in lines]
    if len(set(ids)) != len(ids):
        raise DataError("duplicate line_id in line list")
    assignment: dict[str, list[int]] = {line.line_id: [] for line in lines}
    for idx, token in enumerate(tokens):
        best_pos = 0
        best_area = -1
        for pos, line in enumerate(lines):
            area = token.bbox.intersection_area(line.bbox)
            if area > best_area:
                best_pos, best_area = pos, area
        if best_area == 0:
            cx, cy = token.bbox.center()
            best_pos = min(
                range(len(lines)),
                key=lambda pos: (
                    (lines[pos].bbox.center()[0] - cx) ** 2
                    + (lines[pos].bbox.center()[1] - cy) ** 2,
                    pos,
                ),
            )
        assignment[lines[best_pos].line_id].append(idx)
    return assignment


def order_lines(assignment: dict[str, list[int]], token_order: Sequence[int]) -> list[str]:
    """Order line ids by the minimum position of their members in token_order.

    Lines with no member appearing in token_order come last, in assignment
    (input) order.
    """
    position: dict[int, int] = {}
    for pos, token_idx in enumerate(token_order):
        position.setdefault(token_idx, pos)
    ranked: list[tuple[int, str]] = []
    unranked: list[str] = []
    for line_id, members in assignment.items():
        ranks = [position[m] for m in members if m in position]
        if ranks:
            ranked.append((min(ranks), line_id))
        else:
            unranked.append(line_id)
    ranked.sort(key=lambda pair: pair[0])
    return [line_id for _, line_id in ranked] + unranked


# --- JSONL formats ----------------------------------------------------------
#
# lines file:       {"id": str, "page_id": str, "bbox": [x0, y0, x1, y1], "text": str?}
# line order file:  {"page_id": str, "line_ids": [str]}


def read_lines_file(path: str) -> dict[str, list[LineBox]]:
    """Group line boxes by page id, preserving input order."""
    from .core import _read_jsonl

    pages: dict[str, list[LineBox]] = {}
    for lineno, record in _read_jsonl(path):
        try:
            box = record["bbox"]
            pages.setdefault(record["page_id"], []).append(
                LineBox(bbox=BBox(*box), line_id=record["id"], text=record.get("text"))
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"{path}:{lineno}: bad line record: {exc}") from exc
    return pages


def write_lines_file(path: str, pages_lines: Iterable[tuple[str, Sequence[LineBox]]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for page_id, lines in pages_lines:
            for line in lines:
                record: dict = {
                    "id": line.line_id,
                    "page_id": page_id,
                    "bbox": line.bbox.as_list(),
                }
                if line.text is not None:
                    record["text"] = line.text
                handle.write(json.dumps(record, ensure_ascii=False))
                handle.write("\n")


def write_line_orders(path: str, orders: Iterable[tuple[str, Sequence[str]]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for page_id, line_ids in orders:
            handle.write(json.dumps({"page_id": page_id, "line_ids": list(line_ids)}))
            handle.write("\n")
