"""Semantic Scholar Graph API adapter."""

from typing import Any, Dict, List, Optional, Tuple

from ...errors import SourceParseError
from ...models.paper import PaperRecord, SourceKind, extract_doi
from ...models.query import TemporalConstraint
from .base import SourceAdapter, clean_text

S2_API = "https://api.semanticscholar.org/graph/v1"
PAPER_FIELDS = "paperId,title,abstract,authors,year,venue,citationCount,externalIds,url,fieldsOfStudy"
MAX_REFERENCES = 1000


def parse_paper(paper: Dict[str, Any]) -> Optional[PaperRecord]:
    title = clean_text(paper.get("title"))
    paper_id = paper.get("paperId")
    if not title or not paper_id:
        return None
    external = paper.get("externalIds") or {}
    doi = extract_doi(external.get("DOI") or "")
    fields = paper.get("fieldsOfStudy") or []
    return PaperRecord(
        canonical_id=doi or f"S2:{paper_id}",
        title=title,
        abstract=clean_text(paper.get("abstract")),
        authors=tuple(a.get("name") for a in paper.get("authors") or [] if a.get("name")),
        year=paper.get("year"),
        venue=paper.get("venue") or None,
        citation_count=paper.get("citationCount"),
        source=SourceKind.SEMANTIC_SCHOLAR,
        url=paper.get("url"),
        field=fields[0] if fields else None,
    )


def year_param(temporal: TemporalConstraint) -> Optional[str]:
    if not temporal.lower and not temporal.upper:
        return None
    lower = str(temporal.lower_year) if temporal.lower else ""
    upper = str(temporal.upper_year) if temporal.upper else ""
    return f"{lower}-{upper}"


class SemanticScholarAdapter(SourceAdapter):
    kind = SourceKind.SEMANTIC_SCHOLAR

    @staticmethod
    def paper_id(paper: PaperRecord) -> Optional[str]:
        """Graph API identifier for a record from any source."""
        canonical = paper.canonical_id
        if canonical.startswith("S2:"):
            return canonical[3:]
        if paper.doi:
            return f"DOI:{paper.doi}"
        if canonical.startswith("arXiv:"):
            return f"ARXIV:{canonical[6:]}"
        if canonical.startswith("PMID:"):
            return canonical
        return None

    async def _search(
        self, query: str, temporal: TemporalConstraint, limit: int
    ) -> Tuple[List[PaperRecord], Optional[int]]:
        params = {"query": query, "limit": limit, "fields": PAPER_FIELDS, "year": year_param(temporal)}
        data = await self.http.get_json(f"{S2_API}/paper/search", params)
        if data is None:
            return [], 0
        if not isinstance(data, dict):
            raise SourceParseError("Semantic Scholar: unexpected response shape")
        records = [parse_paper(p) for p in data.get("data") or []]
        return [r for r in records if r is not None], data.get("total")

    async def fetch_references(self, paper: PaperRecord, limit: int) -> Optional[List[PaperRecord]]:
        paper_id = self.paper_id(paper)
        if paper_id is None:
            return None
        params = {"fields": PAPER_FIELDS, "limit": min(limit, MAX_REFERENCES)}
        data = await self.http.get_json(f"{S2_API}/paper/{paper_id}/references", params)
        if data is None:
            return None
        if not isinstance(data, dict):
            raise SourceParseError("Semantic Scholar: unexpected references shape")
        records = [parse_paper(item.get("citedPaper") or {}) for item in data.get("data") or []]
        return [r for r in records if r is not None]
