"""Authority and timeliness reranking of the top of the Paper Cache."""

from typing import Dict, List, Optional, Sequence

from ..config.settings import RunConfig
from ..errors import GatewayError, ParseError
from ..models.paper import JudgedPaper, RankedPaper
from ..models.query import UserQuery
from ..services.llm.gateway import LLMGateway
from ..services.llm.parsers import RerankLine, parse_rerank
from ..services.llm.templates import PromptId
from .base import BaseAgent

MAX_LISTED_AUTHORS = 3


def describe(index: int, paper: JudgedPaper) -> str:
    record = paper.record
    authors = ", ".join(record.authors[:MAX_LISTED_AUTHORS])
    if len(record.authors) > MAX_LISTED_AUTHORS:
        authors += " et al."
    return (
        f"Document {index}: {record.title} "
        f"({record.year or 'n.d.'}, {record.venue or 'unknown venue'}, {authors or 'unknown authors'}) "
        f"relevance: {paper.score:.2f}"
    )


def unchanged(papers: Sequence[JudgedPaper]) -> List[RankedPaper]:
    return [RankedPaper(paper=p, score=p.score) for p in papers]


class RerankerAgent(BaseAgent):
    """Reorders a window of top papers by a model-assigned score."""

    def __init__(self, gateway: LLMGateway, config: Optional[RunConfig] = None):
        super().__init__("Reranker", config)
        self.gateway = gateway
        self.fell_back = False
        self.calls = 0

    def normalize(self, score: float, index: int) -> float:
        """Map a model score onto [0, 1]; ten-point scores are divided by ten."""
        if score > 1.0:
            score /= 10.0
        if score > 1.0:
            self.warn(f"rerank score for document {index} clamped to 1")
            score = 1.0
        if score < 0.0:
            self.warn(f"rerank score for document {index} clamped to 0")
            score = 0.0
        return score

    async def _ask(self, query: UserQuery, window: Sequence[JudgedPaper], time_required: bool) -> Optional[List[RerankLine]]:
        template_id = PromptId.RERANK_WITH_TIME if time_required else PromptId.RERANK_NO_TIME
        bindings = {
            "N": len(window),
            "Query": query.text,
            "doc_list": "\n".join(describe(i, p) for i, p in enumerate(window, start=1)),
        }
        for attempt in (0, 1):
            self.calls += 1
            try:
                text = await self.gateway.ask(
                    template_id, bindings, stage="rerank", attempt=attempt, model=self.config.llm_model
                )
            except GatewayError as e:
                self.warn(f"rerank call failed: {type(e).__name__}: {e}")
                return None
            try:
                return parse_rerank(text, len(window))
            except ParseError as e:
                self.logger.debug(f"Rerank parse failed (attempt {attempt}): {e}")
        return None

    async def rerank(
        self, query: UserQuery, papers: Sequence[JudgedPaper], time_required: bool
    ) -> List[RankedPaper]:
        """
        Rerank the first window of papers; the rest follow in their original order.

        A completion that cannot be parsed after one retry leaves the input
        order and scores untouched.
        """
        self.fell_back = False
        window = list(papers[: self.config.rerank_window])
        rest = unchanged(papers[len(window):])
        if len(window) <= 1:
            return unchanged(window) + rest

        lines = await self._ask(query, window, time_required)
        if lines is None:
            self.fell_back = True
            self.warn("rerank output unusable; kept input order")
            return unchanged(window) + rest

        scores: Dict[int, float] = {line.index: self.normalize(line.score, line.index) for line in lines}
        for index in range(1, len(window) + 1):
            if index not in scores:
                self.warn(f"document {index} missing from rerank output; scored 0")
                scores[index] = 0.0

        order = sorted(range(1, len(window) + 1), key=lambda i: -scores[i])
        reranked = [RankedPaper(paper=window[i - 1], score=scores[i], reranked=True) for i in order]
        return reranked + rest
