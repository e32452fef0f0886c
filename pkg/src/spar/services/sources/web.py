"""Web search (Google) adapter over a pluggable provider."""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Tuple, Union

from ...models.paper import PaperRecord, SourceKind
from ...models.query import TemporalConstraint
from .base import SourceAdapter, clean_text


@dataclass(frozen=True)
class WebResult:
    title: str
    url: str
    snippet: str = ""


class WebSearchProvider(Protocol):
    async def search(self, query: str, limit: int) -> List[WebResult]:
        ...


class NullWebProvider:
    """Default provider; returns nothing."""

    async def search(self, query: str, limit: int) -> List[WebResult]:
        return []


class FixtureWebProvider:
    """Serves canned results from a query -> results mapping or JSON file."""

    def __init__(self, results: Union[Dict[str, List[dict]], str, Path]):
        if isinstance(results, (str, Path)):
            with open(results, encoding="utf-8") as f:
                results = json.load(f)
        self.results = {
            query: [WebResult(**item) for item in items] for query, items in results.items()
        }

    async def search(self, query: str, limit: int) -> List[WebResult]:
        return self.results.get(query, [])[:limit]


class WebSearchAdapter(SourceAdapter):
    """Maps web hits to records by title and URL; abstract and year stay empty."""

    kind = SourceKind.GOOGLE

    def __init__(self, provider: Optional[WebSearchProvider] = None):
        super().__init__(http=None)
        self.provider = provider or NullWebProvider()

    async def _search(
        self, query: str, temporal: TemporalConstraint, limit: int
    ) -> Tuple[List[PaperRecord], Optional[int]]:
        hits = await self.provider.search(query, limit)
        records = [
            PaperRecord(canonical_id=hit.url, title=clean_text(hit.title), url=hit.url, source=SourceKind.GOOGLE)
            for hit in hits
            if clean_text(hit.title) and hit.url
        ]
        return records, None
