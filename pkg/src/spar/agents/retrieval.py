"""Retrieval agent: source-adaptive querying, reference fetching and merging."""

import asyncio
import dataclasses
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

from ..config.settings import RunConfig
from ..errors import GatewayError, ParseError, PreconditionError, SourceError, WrongSourceKind
from ..models.paper import PaperRecord, SourceKind, dedup_key
from ..models.query import TemporalConstraint
from ..services.llm.gateway import LLMGateway
from ..services.llm.parsers import parse_keywords, parse_refined_query
from ..services.llm.templates import PromptId
from ..services.sources.base import SearchPage, SourceAdapter, as_reference
from .base import BaseAgent

REFERENCE_PRIORITY = (SourceKind.SEMANTIC_SCHOLAR, SourceKind.OPENALEX)
BACKFILL_FIELDS = ("abstract", "authors", "year", "venue", "citation_count", "url", "field", "reference_ids")


def _is_empty(value) -> bool:
    return value is None or value == "" or value == ()


def merge_dedup(pages: Iterable[Union[SearchPage, Sequence[PaperRecord]]]) -> List[PaperRecord]:
    """
    Collapse duplicates across pages by dedup key.

    The first occurrence wins and keeps its position; empty fields of the
    winner are filled from later duplicates.
    """
    merged: Dict[str, PaperRecord] = {}
    for page in pages:
        records = page.records if isinstance(page, SearchPage) else page
        for record in records:
            key = dedup_key(record)
            winner = merged.get(key)
            if winner is None:
                merged[key] = record
                continue
            fills = {
                name: getattr(record, name)
                for name in BACKFILL_FIELDS
                if _is_empty(getattr(winner, name)) and not _is_empty(getattr(record, name))
            }
            if fills:
                merged[key] = dataclasses.replace(winner, **fills)
    return list(merged.values())


class RetrievalAgent(BaseAgent):
    """Queries the selected sources and keeps the raw retrieved set for the run."""

    def __init__(
        self,
        gateway: LLMGateway,
        adapters: Mapping[SourceKind, SourceAdapter],
        config: Optional[RunConfig] = None,
    ):
        super().__init__("Retrieval", config)
        self.gateway = gateway
        self.adapters = dict(adapters)
        self.raw_records: Dict[str, PaperRecord] = {}
        self.search_calls = 0
        self.reference_calls = 0

    def reset(self) -> None:
        self.raw_records.clear()
        self.search_calls = 0
        self.reference_calls = 0

    def _note_raw(self, records: Iterable[PaperRecord]) -> None:
        for record in records:
            self.raw_records.setdefault(dedup_key(record), record)

    async def extract_keywords(self, query: str, source: SourceKind) -> List[str]:
        """
        Ask the model for search keywords suited to a structured source.

        A malformed completion is retried once.

        Raises:
            WrongSourceKind: the source takes full query strings
            GatewayError, ParseError: no usable keyword list
        """
        if not source.uses_keywords:
            raise WrongSourceKind(f"{source.display_name} takes the full query string, not keywords")
        bindings = {"source": source.display_name, "user_query": query}
        error: Optional[ParseError] = None
        for attempt in (0, 1):
            text = await self.gateway.ask(
                PromptId.KEYWORD_EXTRACTION, bindings, stage="keywords", attempt=attempt, model=self.config.llm_model
            )
            try:
                return parse_keywords(text)
            except ParseError as e:
                self.logger.debug(f"Keyword parse failed (attempt {attempt}): {e}")
                error = e
        raise error

    async def refine_web_query(self, query: str) -> str:
        """Rewrite a question into a single web search query; falls back to the question."""
        try:
            text = await self.gateway.ask(
                PromptId.QUERY_REFINEMENT, {"UserQuery": query}, stage="refinement", model=self.config.llm_model
            )
            return parse_refined_query(text)
        except (GatewayError, ParseError) as e:
            self.warn(f"web query refinement failed for {query!r}: {e}")
            return query

    async def source_query(self, query: str, source: SourceKind) -> str:
        if source.uses_keywords:
            return self.adapters[source].build_query(await self.extract_keywords(query, source))
        if source is SourceKind.GOOGLE and self.config.refine_web_queries:
            return await self.refine_web_query(query)
        return query

    async def search(
        self, source: SourceKind, query: str, temporal: TemporalConstraint, limit: Optional[int] = None
    ) -> SearchPage:
        """
        Search one source with one query.

        Raises:
            PreconditionError: limit above the page cap, or no adapter for the source
            SourceError, GatewayError, ParseError: the search could not be performed
        """
        limit = self.config.source_limit if limit is None else limit
        if limit > self.config.source_page_cap:
            raise PreconditionError(f"limit {limit} exceeds the page cap {self.config.source_page_cap}")
        adapter = self.adapters.get(source)
        if adapter is None:
            raise PreconditionError(f"No adapter configured for {source.value}")

        submitted = await self.source_query(query, source)
        self.search_calls += 1
        page = await adapter.search(submitted, temporal, limit)
        self._note_raw(page.records)
        return page

    async def _search_or_warn(
        self, source: SourceKind, query: str, temporal: TemporalConstraint
    ) -> Optional[SearchPage]:
        try:
            return await self.search(source, query, temporal)
        except (SourceError, GatewayError, ParseError) as e:
            self.warn(f"{source.value} search failed for {query!r}: {type(e).__name__}: {e}")
            return None

    async def search_all(
        self, queries: Sequence[str], sources: Sequence[SourceKind], temporal: TemporalConstraint
    ) -> List[SearchPage]:
        """Fan out every query over every source; failures become warnings. Pages come back in (query, source) order."""
        pages = await asyncio.gather(
            *(self._search_or_warn(source, query, temporal) for query in queries for source in sources)
        )
        return [page for page in pages if page is not None]

    async def fetch_references(self, paper: PaperRecord, limit: Optional[int] = None) -> List[PaperRecord]:
        """
        Outgoing references of a depth-0 paper as depth-1 records.

        Semantic Scholar is asked first, then OpenAlex. Source failures are
        recorded as warnings and the next source is tried, as is a source
        that knows the paper but lists no references.

        Raises:
            PreconditionError: the paper was itself reached through references
        """
        if paper.refchain_depth != 0:
            raise PreconditionError("References are only fetched for depth-0 papers")
        limit = limit or self.config.source_page_cap
        for kind in REFERENCE_PRIORITY:
            adapter = self.adapters.get(kind)
            if adapter is None:
                continue
            self.reference_calls += 1
            try:
                references = await adapter.fetch_references(paper, limit)
            except SourceError as e:
                self.warn(f"{kind.value} references failed for {paper.canonical_id}: {type(e).__name__}: {e}")
                continue
            if not references:
                continue
            records = [as_reference(record, paper) for record in references]
            self._note_raw(records)
            return records
        return []
