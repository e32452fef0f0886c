"""Source adapter interface and shared record helpers."""

import dataclasses
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from ...errors import PreconditionError
from ...models.paper import PaperRecord, SourceKind
from ...models.query import TemporalConstraint
from ...utils.logging import get_logger
from ..http import SourceHttpClient

_TAGS = re.compile(r"<[^>]+>")
_SPACES = re.compile(r"\s+")


@dataclass(frozen=True)
class SearchPage:
    """One page of search results from a single source."""

    records: Tuple[PaperRecord, ...]
    source: SourceKind
    query_used: str
    total_available: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        for record in self.records:
            if record.source is not self.source:
                raise PreconditionError(f"Record from {record.source.value} on a {self.source.value} page")
            if record.refchain_depth != 0:
                raise PreconditionError("Search results must have refchain depth 0")


def clean_text(value: Optional[str]) -> str:
    """Strip markup and collapse whitespace."""
    if not value:
        return ""
    return _SPACES.sub(" ", _TAGS.sub("", value)).strip()


def post_filter(records: Iterable[PaperRecord], temporal: TemporalConstraint) -> List[PaperRecord]:
    return [r for r in records if temporal.admits_year(r.year)]


def as_reference(record: PaperRecord, parent: PaperRecord) -> PaperRecord:
    return dataclasses.replace(record, refchain_depth=1, retrieved_by=parent.canonical_id)


class SourceAdapter(ABC):
    """Base class for the per-source API adapters."""

    kind: SourceKind

    def __init__(self, http: Optional[SourceHttpClient] = None):
        self.http = http
        self.logger = get_logger(f"source.{self.kind.value.lower()}")

    def build_query(self, keywords: Sequence[str]) -> str:
        """Join extracted keywords into the source's query string."""
        return " ".join(keywords)

    async def search(self, query: str, temporal: TemporalConstraint, limit: int) -> SearchPage:
        """
        Search the source.

        Native date filters are applied where the API supports them and the
        year post-filter is always applied on top.

        Raises:
            PreconditionError: limit below 1
            SourceError subclasses on transport, quota or parse failures
        """
        if limit < 1:
            raise PreconditionError(f"limit must be positive, got {limit}")
        records, total = await self._search(query, temporal, limit)
        records = post_filter(records, temporal)[:limit]
        self.logger.debug(f"{len(records)} records for {query!r}")
        return SearchPage(records=tuple(records), source=self.kind, query_used=query, total_available=total)

    @abstractmethod
    async def _search(
        self, query: str, temporal: TemporalConstraint, limit: int
    ) -> Tuple[List[PaperRecord], Optional[int]]:
        ...

    async def fetch_references(self, paper: PaperRecord, limit: int) -> Optional[List[PaperRecord]]:
        """Outgoing references of a paper, or None when this source cannot resolve it."""
        return None
