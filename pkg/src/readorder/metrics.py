"""Sequence metrics: page-level BLEU, average relative distance, corpus stats.

Both metrics operate on index sequences rather than word strings, so repeated
words on a page cannot corrupt the n-gram counts.

page_bleu is BLEU-4 without smoothing: the geometric mean of modified n-gram
precisions for n = 1..4 (capped at the reference length for short pages),
multiplied by the brevity penalty min(1, exp(1 - |ref| / |hyp|)). Any needed
precision of zero gives a score of zero.

ard compares a reference sequence A with a generated reordering B that may
omit elements: an element at position k of A scores |k - position in B| when
present and |A| when omitted; the score is the mean over A.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

from .core import DataError, Page
from .heuristic import heuristic_order

BLEU_BUCKET_EDGES = (0.25, 0.5, 0.75, 1.0)

_T = TypeVar("_T")
_R = TypeVar("_R")


def page_bleu(hypothesis: Sequence[int], reference: Sequence[int], max_order: int = 4) -> float:
    """BLEU of a predicted index sequence against the gold sequence of one page."""
    if not reference:
        raise DataError("BLEU reference must be non-empty")
    if not hypothesis:
        return 0.0
    orders = min(max_order, len(reference))
    log_sum = 0.0
    for n in range(1, orders + 1):
        hyp_counts = Counter(tuple(hypothesis[i : i + n]) for i in range(len(hypothesis) - n + 1))
        if not hyp_counts:
            return 0.0
        ref_counts = Counter(tuple(reference[i : i + n]) for i in range(len(reference) - n + 1))
        clipped = sum(min(count, ref_counts[gram]) for gram, count in hyp_counts.items())
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / sum(hyp_counts.values()))
    brevity = min(1.0, math.exp(1.0 - len(reference) / len(hypothesis)))
    return brevity * math.exp(log_sum / orders)


def ard(reference: Sequence[int], hypothesis: Sequence[int]) -> float:
    """Mean positional displacement of reference elements, |ref| per omission."""
    n = len(reference)
    if n == 0:
        raise DataError("ARD reference must be non-empty")
    if len(set(reference)) != n:
        raise DataError("ARD reference contains duplicate elements")
    if len(set(hypothesis)) != len(hypothesis):
        raise DataError("ARD hypothesis contains duplicate elements")
    position = {element: idx for idx, element in enumerate(hypothesis)}
    total = 0
    for k, element in enumerate(reference):
        found = position.get(element)
        total += n if found is None else abs(k - found)
    return total / n


@dataclass(frozen=True, slots=True)
class PageScore:
    page_id: str
    bleu: float
    ard: float


@dataclass(frozen=True, slots=True)
class EvalReport:
    per_page: tuple[PageScore, ...]
    avg_bleu: float
    avg_ard: float

    @classmethod
    def from_scores(cls, scores: Sequence[PageScore]) -> "EvalReport":
        if not scores:
            raise DataError("cannot build a report from zero pages")
        return cls(
            per_page=tuple(scores),
            avg_bleu=sum(s.bleu for s in scores) / len(scores),
            avg_ard=sum(s.ard for s in scores) / len(scores),
        )

    def to_dict(self) -> dict:
        return {
            "avg_bleu": self.avg_bleu,
            "avg_ard": self.avg_ard,
            "pages": [
                {"page_id": s.page_id, "bleu": s.bleu, "ard": s.ard} for s in self.per_page
            ],
        }


def dedup_indices(indices: Sequence[int]) -> list[int]:
    """Drop repeated indices, keeping first occurrences (repeats become omissions)."""
    seen: set[int] = set()
    out = []
    for idx in indices:
        if idx not in seen:
            seen.add(idx)
            out.append(idx)
    return out


def _score_pair(args: tuple[str, Sequence[int], int]) -> PageScore:
    page_id, indices, n = args
    hyp = dedup_indices(indices)
    ref = list(range(n))
    return PageScore(page_id=page_id, bleu=page_bleu(hyp, ref), ard=ard(ref, hyp))


def parallel_map(fn: Callable[[_T], _R], items: Sequence[_T], jobs: int = 1) -> list[_R]:
    """Order-preserving map, optionally over worker processes."""
    if jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (jobs * 4))))


def evaluate_predictions(predictions, pages: Sequence[Page], jobs: int = 1) -> EvalReport:
    """Score predictions against gold pages; report rows follow gold page order.

    Predicted index sequences are de-duplicated before scoring, so repeated
    indices from unconstrained decoding count as omissions.
    """
    by_id = {}
    for pred in predictions:
        if pred.page_id in by_id:
            raise DataError(f"duplicate prediction for page {pred.page_id!r}")
        by_id[pred.page_id] = pred
    work = []
    for page in pages:
        pred = by_id.pop(page.id, None)
        if pred is None:
            raise DataError(f"no prediction for page {page.id!r}")
        pred.validate_against(page)
        work.append((page.id, pred.indices, len(page)))
    if by_id:
        raise DataError(f"predictions for unknown pages: {sorted(by_id)!r}")
    scores = parallel_map(_score_pair, work, jobs=jobs)
    return EvalReport.from_scores(scores)


@dataclass(frozen=True, slots=True)
class DatasetStats:
    page_count: int
    avg_words: float
    avg_heuristic_bleu: float
    bleu_buckets: tuple[int, int, int, int]

    def to_dict(self) -> dict:
        labels = ["(0.00, 0.25]", "(0.25, 0.50]", "(0.50, 0.75]", "(0.75, 1.00]"]
        return {
            "page_count": self.page_count,
            "avg_words": self.avg_words,
            "avg_heuristic_bleu": self.avg_heuristic_bleu,
            "bleu_buckets": dict(zip(labels, self.bleu_buckets)),
        }


def bleu_bucket(value: float) -> int:
    """Histogram bucket for a BLEU value; the lowest bucket includes 0."""
    for idx, edge in enumerate(BLEU_BUCKET_EDGES):
        if value <= edge:
            return idx
    return len(BLEU_BUCKET_EDGES) - 1


def _page_stat(page: Page) -> tuple[int, float]:
    order = heuristic_order(page.tokens)
    return len(page), page_bleu(order, list(range(len(page))))


def dataset_stats(pages: Sequence[Page], jobs: int = 1) -> DatasetStats:
    """Word-count and heuristic-difficulty statistics over a dataset."""
    if not pages:
        raise DataError("cannot compute stats for an empty dataset")
    results = parallel_map(_page_stat, list(pages), jobs=jobs)
    buckets = [0, 0, 0, 0]
    for _, bleu in results:
        buckets[bleu_bucket(bleu)] += 1
    return DatasetStats(
        page_count=len(results),
        avg_words=sum(n for n, _ in results) / len(results),
        avg_heuristic_bleu=sum(b for _, b in results) / len(results),
        bleu_buckets=(buckets[0], buckets[1], buckets[2], buckets[3]),
    )
