"""Left-to-right, top-to-bottom baseline order.

Tokens are grouped into visual lines first: two tokens share a line when their
vertical intervals overlap by at least half the smaller token's height, and
lines are the connected components of that relation. Lines are read top to
bottom (by minimum y0), tokens within a line left to right (by x0). Ties fall
back to input index, so the result is deterministic.
"""

from __future__ import annotations

from typing import Sequence

from .core import DataError, Token


def _find(parent: list[int], i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _union(parent: list[int], a: int, b: int) -> None:
    ra, rb = _find(parent, a), _find(parent, b)
    if ra != rb:
        parent[max(ra, rb)] = min(ra, rb)


def _same_line(a: Token, b: Token) -> bool:
    overlap = min(a.bbox.y1, b.bbox.y1) - max(a.bbox.y0, b.bbox.y0)
    smaller = min(a.bbox.height, b.bbox.height)
    # 2 * overlap >= smaller keeps the comparison in integers
    return overlap >= 0 and 2 * overlap >= smaller


def visual_lines(tokens: Sequence[Token]) -> list[list[int]]:
    """Partition token indices into visual lines, ordered by ascending top edge."""
    if not tokens:
        raise DataError("cannot group an empty token list")
    n = len(tokens)
    order = sorted(range(n), key=lambda i: (tokens[i].bbox.y0, i))
    parent = list(range(n))
    for a_pos, i in enumerate(order):
        y1_i = tokens[i].bbox.y1
        for j in order[a_pos + 1 :]:
            # y0 ascending: once strictly past this token's bottom, no later
            # token can intersect its vertical interval
            if tokens[j].bbox.y0 > y1_i:
                break
            if _same_line(tokens[i], tokens[j]):
                _union(parent, i, j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(_find(parent, i), []).append(i)
    lines = list(groups.values())
    lines.sort(key=lambda members: (min(tokens[i].bbox.y0 for i in members), min(members)))
    return lines


def heuristic_order(tokens: Sequence[Token]) -> list[int]:
    """Permutation of [0, n) reading lines top-to-bottom, words left-to-right."""
    result = []
    for members in visual_lines(tokens):
        members.sort(key=lambda i: (tokens[i].bbox.x0, i))
        result.extend(members)
    return result
