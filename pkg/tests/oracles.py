"""Independent reference implementations used to derive expected test values.

These deliberately avoid the code paths (and data structures) of the library:
BLEU counts n-gram overlap by sorted-merge multiset intersection instead of
hash-clipping, the displacement metric is a direct transliteration of its
formula, and token matching is an exhaustive scan.
"""

from __future__ import annotations

import math
from typing import Sequence


def bleu_oracle(hypothesis: Sequence[int], reference: Sequence[int], max_order: int = 4) -> float:
    if len(reference) == 0:
        raise ValueError("empty reference")
    if len(hypothesis) == 0:
        return 0.0
    orders = min(max_order, len(reference))
    precisions = []
    for n in range(1, orders + 1):
        hyp_grams = sorted(tuple(hypothesis[i : i + n]) for i in range(len(hypothesis) - n + 1))
        ref_grams = sorted(tuple(reference[i : i + n]) for i in range(len(reference) - n + 1))
        if not hyp_grams:
            return 0.0
        matched = 0
        i = j = 0
        while i < len(hyp_grams) and j < len(ref_grams):
            if hyp_grams[i] == ref_grams[j]:
                matched += 1
                i += 1
                j += 1
            elif hyp_grams[i] < ref_grams[j]:
                i += 1
            else:
                j += 1
        if matched == 0:
            return 0.0
        precisions.append(matched / len(hyp_grams))
    product = 1.0
    for p in precisions:
        product *= p
    if len(hypothesis) >= len(reference):
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - len(reference) / len(hypothesis))
    return brevity * product ** (1.0 / orders)


def ard_oracle(reference: Sequence[int], hypothesis: Sequence[int]) -> float:
    n = len(reference)
    total = 0
    hyp = list(hypothesis)
    for k in range(n):
        element = reference[k]
        if element in hyp:
            total += abs(k - hyp.index(element))
        else:
            total += n
    return total / n


def match_tokens_exhaustive(seq_keys: Sequence[tuple], candidate_keys: Sequence[tuple]) -> list[int]:
    """For each key, the positions of every matching candidate (no early exit)."""
    out = []
    for key in seq_keys:
        hits = [pos for pos, other in enumerate(candidate_keys) if other == key]
        if len(hits) != 1:
            raise AssertionError(f"key {key!r} has {len(hits)} matches")
        out.append(hits[0])
    return out


def mask_reference(n_src: int, n_tgt: int) -> list[list[bool]]:
    """Visibility by direct case analysis over every (i, j) pair."""
    size = n_src + n_tgt
    rows = []
    for i in range(size):
        row = []
        for j in range(size):
            if j < n_src:
                row.append(True)
            elif i >= n_src and n_src <= j <= i:
                row.append(True)
            else:
                row.append(False)
        rows.append(row)
    return rows
