"""Trajectory-conditioned query evolution with novelty filtering."""

import asyncio
import json
import random
from typing import FrozenSet, Iterable, List, Optional, Sequence

from ..config.settings import RunConfig
from ..errors import GatewayError, ParseError
from ..models.paper import JudgedPaper, PaperRecord, normalize_title
from ..models.query import UserQuery
from ..services.llm.gateway import LLMGateway
from ..services.llm.parsers import parse_string_array
from ..services.llm.templates import PromptId
from .base import BaseAgent


def tokens(text: str) -> FrozenSet[str]:
    """Lowercase, punctuation-stripped token set."""
    return frozenset(normalize_title(text).split())


def jaccard(a: str, b: str) -> float:
    left, right = tokens(a), tokens(b)
    union = left | right
    if not union:
        return 1.0
    return len(left & right) / len(union)


def select_and_filter(
    candidates: Iterable[str],
    searched: Sequence[str],
    pending: Sequence[str],
    subset_size: int,
    seed: int,
    jaccard_threshold: float = 0.8,
) -> List[str]:
    """
    Drop used and near-duplicate candidates, then draw a seeded random subset.

    Candidates equal to a searched or pending query are removed, as are
    candidates whose token-set Jaccard similarity with any searched query
    reaches the threshold.
    """
    used = set(searched) | set(pending)
    novel = []
    for candidate in dict.fromkeys(candidates):
        if candidate in used:
            continue
        if any(jaccard(candidate, query) >= jaccard_threshold for query in searched):
            continue
        novel.append(candidate)
    return random.Random(seed).sample(novel, min(subset_size, len(novel)))


class QueryEvolverAgent(BaseAgent):
    """Generates follow-up queries from cached papers; evolution is best effort."""

    def __init__(self, gateway: LLMGateway, config: Optional[RunConfig] = None):
        super().__init__("QueryEvolver", config)
        self.gateway = gateway
        self.calls = 0

    async def evolve(
        self, initial: UserQuery, searched: Sequence[str], paper: PaperRecord, n: Optional[int] = None
    ) -> List[str]:
        """New queries inspired by one paper, minus anything already searched. Failures give []."""
        n = n or self.config.evolution_n
        bindings = {
            "user_query": initial.text,
            "searched_queries": json.dumps(list(searched), ensure_ascii=False),
            "doc_title": paper.title,
            "doc_abstract": paper.abstract,
            "doc_field": paper.field or "",
            "N": n,
        }
        self.calls += 1
        try:
            text = await self.gateway.ask(
                PromptId.QUERY_EVOLUTION, bindings, stage="evolution", model=self.config.llm_model
            )
            generated = parse_string_array(text)
        except (GatewayError, ParseError) as e:
            self.warn(f"evolution from {paper.title!r} failed: {type(e).__name__}: {e}")
            return []

        seen = {query.casefold() for query in searched}
        queries = []
        for query in generated:
            query = query.strip()
            if query and query.casefold() not in seen:
                seen.add(query.casefold())
                queries.append(query)
        return queries

    async def evolve_cache(
        self,
        initial: UserQuery,
        searched: Sequence[str],
        pending: Sequence[str],
        cache: Sequence[JudgedPaper],
        iteration: int,
    ) -> List[str]:
        """Evolve from the highest-scoring cache members and select the queries to queue."""
        sources = list(cache)[: self.config.evolution_paper_cap]
        results = await asyncio.gather(*(self.evolve(initial, searched, p.record) for p in sources))
        candidates = [query for batch in results for query in batch]
        selected = select_and_filter(
            candidates,
            searched,
            pending,
            self.config.subset_size,
            self.config.seed + iteration,
            self.config.jaccard_threshold,
        )
        self.logger.info(f"Iteration {iteration}: {len(candidates)} evolved queries, {len(selected)} selected")
        return selected
