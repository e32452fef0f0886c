"""Single-layer reference expansion of the Related Pool."""

import asyncio
from typing import List, Optional, Sequence, Set

from ..config.settings import RunConfig
from ..models.paper import JudgedPaper, PaperRecord, dedup_key
from ..models.query import UserQuery
from .base import BaseAgent
from .judgement import JudgementAgent
from .retrieval import RetrievalAgent, merge_dedup


def most_cited(references: Sequence[PaperRecord], fanout: int) -> List[PaperRecord]:
    """Highest citation count first; records without counts keep source order after those with counts."""
    ranked = sorted(
        references,
        key=lambda r: -(r.citation_count if r.citation_count is not None else -1),
    )
    return ranked[:fanout]


class RefChainAgent(BaseAgent):
    """Follows outgoing references of depth-0 pool members exactly once per run."""

    def __init__(
        self,
        retrieval: RetrievalAgent,
        judgement: JudgementAgent,
        config: Optional[RunConfig] = None,
    ):
        super().__init__("RefChain", config)
        self.retrieval = retrieval
        self.judgement = judgement
        self.expanded: Set[str] = set()

    def reset(self) -> None:
        self.expanded.clear()

    async def expand(
        self, query: UserQuery, pool: Sequence[JudgedPaper], threshold: Optional[float] = None
    ) -> List[JudgedPaper]:
        """
        Return the pool extended with qualifying references.

        Only depth-0 members not yet expanded in this run are followed.
        Depth-1 members are never expanded.
        """
        targets = [p for p in pool if p.record.refchain_depth == 0 and p.key not in self.expanded]
        if not targets:
            return list(pool)
        self.expanded.update(p.key for p in targets)

        fetched = await asyncio.gather(*(self.retrieval.fetch_references(p.record) for p in targets))
        candidates = merge_dedup(most_cited(refs, self.config.refchain_fanout) for refs in fetched)

        known = {p.key for p in pool}
        judged = await self.judgement.judge_all(query, [r for r in candidates if dedup_key(r) not in known])
        admitted = self.judgement.filter_related(judged, threshold)
        self.logger.info(
            f"Expanded {len(targets)} papers: {sum(map(len, fetched))} references, {len(admitted)} admitted"
        )
        return list(pool) + admitted
