"""Query understanding: intent, sources, temporal bounds and refinements."""

import dataclasses
from typing import List, Optional, Sequence, Tuple

from ..config.settings import RunConfig
from ..errors import InterpretationParseError, ParseError, PreconditionError
from ..models.paper import SourceKind
from ..models.query import FALLBACK_SOURCES, QueryInterpretation, UserQuery
from ..services.llm.gateway import LLMGateway
from ..services.llm.parsers import parse_interpretation
from ..services.llm.templates import PromptId
from .base import BaseAgent


def build_query_list(interp: QueryInterpretation, query: UserQuery) -> List[str]:
    """The original query followed by the refinements, without duplicates."""
    return list(dict.fromkeys([query.text, *interp.refined_queries]))


def restrict_sources(
    sources: Sequence[SourceKind], allowlist: Sequence[SourceKind]
) -> Tuple[SourceKind, ...]:
    """Intersect with an allowlist; an empty intersection yields the allowlist itself."""
    if not allowlist:
        return tuple(sources)
    kept = tuple(s for s in sources if s in allowlist)
    return kept or tuple(dict.fromkeys(allowlist))


class QueryUnderstandingAgent(BaseAgent):
    """Turns the user's question into a QueryInterpretation."""

    def __init__(self, gateway: LLMGateway, config: Optional[RunConfig] = None):
        super().__init__("QueryUnderstanding", config)
        self.gateway = gateway

    async def interpret(self, query: UserQuery) -> QueryInterpretation:
        """
        Interpret a query with the language model.

        Raises:
            InterpretationParseError: the completion could not be parsed
            GatewayError, CassetteMiss: the completion could not be obtained
        """
        bindings = {
            "user_query": query.text,
            "search_date": query.search_time.isoformat() if query.search_time else "an unspecified date",
        }
        text = await self.gateway.ask(
            PromptId.QUERY_INTERPRETATION, bindings, stage="interpretation", model=self.config.llm_model
        )
        try:
            interp = parse_interpretation(text, reference=query.search_time, fallback_sources=FALLBACK_SOURCES)
        except (ParseError, PreconditionError) as e:
            raise InterpretationParseError(f"Could not parse interpretation: {e}") from e

        interp = self.finalize(interp, query)
        self.update_state({"interpretation": interp.to_dict()})
        self.logger.info(
            f"Intent {interp.intent.value}, sources {[s.value for s in interp.sources]}, "
            f"{len(interp.refined_queries)} refined queries"
        )
        return interp

    def finalize(self, interp: QueryInterpretation, query: UserQuery) -> QueryInterpretation:
        """Apply the refinement cap, the temporal repair and the no-expansion rule."""
        if not interp.needs_expansion:
            return dataclasses.replace(interp, refined_queries=(query.text,))

        refined = list(interp.refined_queries[: self.config.max_refinements])
        temporal = interp.temporal
        if temporal.required and temporal.label:
            repaired = []
            for text in refined:
                if not temporal.mentioned_in(text):
                    self.logger.debug(f"Appending date bound to refinement {text!r}")
                    text = f"{text} ({temporal.label})"
                repaired.append(text)
            refined = repaired
        return dataclasses.replace(interp, refined_queries=tuple(dict.fromkeys(refined)))

    def identity(self, query: UserQuery) -> QueryInterpretation:
        return QueryInterpretation.identity(query)
