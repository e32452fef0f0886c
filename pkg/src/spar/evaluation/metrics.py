"""Document-level retrieval metrics."""

from typing import Dict, List, Sequence

from ..errors import PreconditionError
from ..models.paper import PaperRecord, normalize_title
from ..models.state import MetricCounts
from .benchmark import GoldStub


def matches(record: PaperRecord, stub: GoldStub) -> bool:
    """Same id (case-insensitive) or same normalized title."""
    if stub.paper_id and record.canonical_id.casefold() == stub.paper_id.casefold():
        return True
    return normalize_title(record.title) == stub.normalized_title


def match(retrieved: Sequence[PaperRecord], gold: Sequence[GoldStub]) -> MetricCounts:
    """
    One-to-one matching of retrieved records to gold papers.

    Maximum bipartite matching by augmenting paths, so the count does not
    depend on retrieval order.
    """
    candidates: List[List[int]] = [
        [g for g, stub in enumerate(gold) if matches(record, stub)] for record in retrieved
    ]
    owner: Dict[int, int] = {}

    def augment(r: int, seen: set) -> bool:
        for g in candidates[r]:
            if g in seen:
                continue
            seen.add(g)
            if g not in owner or augment(owner[g], seen):
                owner[g] = r
                return True
        return False

    tp = sum(1 for r in range(len(retrieved)) if candidates[r] and augment(r, set()))
    return MetricCounts(tp=tp, fp=len(retrieved) - tp, fn=len(gold) - tp)


def precision(counts: MetricCounts) -> float:
    denominator = counts.tp + counts.fp
    return counts.tp / denominator if denominator else 0.0


def recall(counts: MetricCounts) -> float:
    denominator = counts.tp + counts.fn
    return counts.tp / denominator if denominator else 0.0


def f1(p: float, r: float) -> float:
    """Harmonic mean; 0 when both are 0."""
    return 2 * p * r / (p + r) if p + r else 0.0


def recall_at_k(ranked: Sequence[PaperRecord], gold: Sequence[GoldStub], k: int) -> float:
    if k < 1:
        raise PreconditionError(f"k must be positive, got {k}")
    return recall(match(ranked[:k], gold))
