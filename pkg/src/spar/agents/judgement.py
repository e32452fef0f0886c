"""Judgement agent: LLM relevance scoring and threshold filtering."""

import asyncio
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..config.settings import RunConfig
from ..errors import GatewayError, ParseError
from ..models.paper import JudgedPaper, JudgeVariant, PaperRecord, RelevanceJudgement, dedup_key
from ..models.query import UserQuery
from ..services.llm.gateway import LLMGateway
from ..services.llm.parsers import parse_score
from ..services.llm.templates import PromptId
from .base import BaseAgent

NO_REASONING = "(no reasoning given)"


def filter_related(
    judged: Iterable[JudgedPaper], threshold: float, inclusive: bool = False
) -> List[JudgedPaper]:
    """Papers scoring above the threshold (or at it, when inclusive), in input order."""
    if inclusive:
        return [paper for paper in judged if paper.score >= threshold]
    return [paper for paper in judged if paper.score > threshold]


def document_text(paper: PaperRecord) -> str:
    return f"Title: {paper.title}\nAbstract: {paper.abstract}"


class JudgementAgent(BaseAgent):
    """Scores papers against the initial query, memoized per paper, query and prompt variant."""

    def __init__(self, gateway: LLMGateway, config: Optional[RunConfig] = None):
        super().__init__("Judgement", config)
        self.gateway = gateway
        self._memo: Dict[Tuple[str, str, str], RelevanceJudgement] = {}
        self.calls = 0

    def reset(self) -> None:
        self._memo.clear()
        self.calls = 0

    @staticmethod
    def _prompt(query: UserQuery, paper: PaperRecord, variant: JudgeVariant):
        if variant is JudgeVariant.COMPLEX:
            return PromptId.RELEVANCE_COMPLEX, {"query": query.text, "doc": document_text(paper)}
        return PromptId.RELEVANCE_BRIEF, {"UserQuery": query.text, "title": paper.title, "abstract": paper.abstract}

    async def judge(
        self, query: UserQuery, paper: PaperRecord, variant: Optional[JudgeVariant] = None
    ) -> RelevanceJudgement:
        """
        Score one paper.

        An unparseable completion is retried once with a new attempt number.
        Gateway failures and a second parse failure yield score 0 flagged as
        parse-failed; CassetteMiss propagates.
        """
        variant = variant or self.config.judge_variant
        memo_key = (dedup_key(paper), query.text, variant.value)
        if memo_key in self._memo:
            return self._memo[memo_key]

        template_id, bindings = self._prompt(query, paper, variant)
        model = self.config.judge_model
        judgement = None
        for attempt in (0, 1):
            self.calls += 1
            try:
                text = await self.gateway.ask(template_id, bindings, stage="judgement", attempt=attempt, model=model)
            except GatewayError as e:
                self.warn(f"judging {paper.title!r} failed: {type(e).__name__}: {e}")
                break
            try:
                score, reasoning = parse_score(text)
            except ParseError as e:
                self.logger.debug(f"Score parse failed for {paper.title!r} (attempt {attempt}): {e}")
                continue
            judgement = RelevanceJudgement(
                score=score,
                reasoning=reasoning or NO_REASONING,
                prompt_variant=variant,
                judge_model=model,
            )
            break

        if judgement is None:
            self.warn(f"no usable judgement for {paper.title!r}; scored 0")
            judgement = RelevanceJudgement(
                score=0.0, reasoning="", prompt_variant=variant, judge_model=model, parse_failed=True
            )
        self._memo[memo_key] = judgement
        return judgement

    async def judge_all(
        self, query: UserQuery, papers: Sequence[PaperRecord], variant: Optional[JudgeVariant] = None
    ) -> List[JudgedPaper]:
        judgements = await asyncio.gather(*(self.judge(query, paper, variant) for paper in papers))
        return [JudgedPaper(paper, judgement) for paper, judgement in zip(papers, judgements)]

    def filter_related(self, judged: Iterable[JudgedPaper], threshold: Optional[float] = None) -> List[JudgedPaper]:
        threshold = self.config.threshold if threshold is None else threshold
        return filter_related(judged, threshold, inclusive=self.config.threshold_inclusive)
