"""Live pipeline state and evaluation counters."""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List

from ..errors import PreconditionError
from .paper import JudgedPaper
from .query import QueryInterpretation, UserQuery


@dataclass
class SearchState:
    """Mutable run state, owned by the orchestrator loop.

    Attributes:
        pending_queries: the query list awaiting execution
        searched_queries: every query already executed, in execution order
        related_pool: papers judged above threshold, keyed by dedup key
        paper_cache: the current top-K selection from the pool
    """

    initial_query: UserQuery
    interpretation: QueryInterpretation
    pending_queries: List[str] = field(default_factory=list)
    searched_queries: List[str] = field(default_factory=list)
    related_pool: Dict[str, JudgedPaper] = field(default_factory=dict)
    paper_cache: List[JudgedPaper] = field(default_factory=list)
    iteration: int = 0

    def enqueue(self, queries: Iterable[str]) -> List[str]:
        """Queue queries that were neither searched nor already pending. Returns the ones added."""
        seen = set(self.searched_queries) | set(self.pending_queries)
        added = []
        for query in queries:
            if query in seen:
                continue
            seen.add(query)
            self.pending_queries.append(query)
            added.append(query)
        return added

    def take_pending(self) -> List[str]:
        """Move every pending query into the searched history and return them."""
        batch = list(self.pending_queries)
        self.pending_queries.clear()
        self.searched_queries.extend(batch)
        return batch

    def merge_into_pool(self, papers: Iterable[JudgedPaper]) -> int:
        """Add papers to the Related Pool; the first entry per key wins. Returns the count added."""
        added = 0
        for paper in papers:
            if paper.key not in self.related_pool:
                self.related_pool[paper.key] = paper
                added += 1
        return added

    def set_cache(self, cache: List[JudgedPaper], k: int) -> None:
        if len(cache) > k:
            raise PreconditionError(f"Paper cache holds {len(cache)} entries, limit is {k}")
        missing = [p.key for p in cache if p.key not in self.related_pool]
        if missing:
            raise PreconditionError(f"Cache entries missing from the Related Pool: {missing}")
        self.paper_cache = list(cache)

    @property
    def pool(self) -> List[JudgedPaper]:
        return list(self.related_pool.values())


@dataclass(frozen=True)
class MetricCounts:
    """True positive, false positive and false negative counts for one query."""

    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn) < 0:
            raise PreconditionError("Metric counts must be non-negative")

    def __add__(self, other: "MetricCounts") -> "MetricCounts":
        return MetricCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)
