"""OpenAlex works API adapter."""

from typing import Any, Dict, List, Optional, Tuple

from ...errors import SourceParseError
from ...models.paper import PaperRecord, SourceKind, extract_doi
from ...models.query import TemporalConstraint
from .base import SourceAdapter, clean_text

OPENALEX_API = "https://api.openalex.org"
OPENALEX_PREFIX = "https://openalex.org/"
BATCH_SIZE = 50


def reconstruct_abstract(inverted_index: Optional[Dict[str, List[int]]]) -> str:
    """Rebuild abstract text from OpenAlex's word -> positions index."""
    if not inverted_index:
        return ""
    positions = {}
    for word, indexes in inverted_index.items():
        for index in indexes:
            positions[index] = word
    return " ".join(positions[i] for i in sorted(positions))


def parse_work(work: Dict[str, Any]) -> Optional[PaperRecord]:
    title = clean_text(work.get("title") or work.get("display_name"))
    if not title:
        return None
    doi = extract_doi(work.get("doi") or "")
    openalex_id = work.get("id") or ""
    location = work.get("primary_location") or {}
    venue = (location.get("source") or {}).get("display_name")
    topic = work.get("primary_topic") or {}
    field = (topic.get("field") or {}).get("display_name")
    authors = [
        (a.get("author") or {}).get("display_name")
        for a in work.get("authorships") or []
    ]
    return PaperRecord(
        canonical_id=doi or openalex_id,
        title=title,
        abstract=reconstruct_abstract(work.get("abstract_inverted_index")),
        authors=tuple(a for a in authors if a),
        year=work.get("publication_year"),
        venue=venue,
        citation_count=work.get("cited_by_count"),
        source=SourceKind.OPENALEX,
        reference_ids=tuple(work.get("referenced_works") or ()),
        url=location.get("landing_page_url") or (work.get("doi") or openalex_id or None),
        field=field,
    )


def date_filter(temporal: TemporalConstraint) -> List[str]:
    filters = []
    if temporal.lower:
        filters.append(f"from_publication_date:{temporal.lower.isoformat()}")
    if temporal.upper:
        filters.append(f"to_publication_date:{temporal.upper.isoformat()}")
    return filters


class OpenAlexAdapter(SourceAdapter):
    kind = SourceKind.OPENALEX

    def __init__(self, http, mailto: Optional[str] = None):
        super().__init__(http)
        self.mailto = mailto

    def _params(self, **params: Any) -> Dict[str, Any]:
        if self.mailto:
            params["mailto"] = self.mailto
        return params

    def _parse_results(self, data: Any) -> List[PaperRecord]:
        if not isinstance(data, dict) or not isinstance(data.get("results"), list):
            raise SourceParseError("OpenAlex: unexpected response shape")
        records = [parse_work(work) for work in data["results"]]
        return [r for r in records if r is not None]

    async def _search(
        self, query: str, temporal: TemporalConstraint, limit: int
    ) -> Tuple[List[PaperRecord], Optional[int]]:
        filters = date_filter(temporal)
        params = self._params(
            search=query,
            filter=",".join(filters) if filters else None,
            **{"per-page": limit},
        )
        data = await self.http.get_json(f"{OPENALEX_API}/works", params)
        if data is None:
            return [], 0
        total = (data.get("meta") or {}).get("count") if isinstance(data, dict) else None
        return self._parse_results(data), total

    async def _resolve(self, paper: PaperRecord) -> Optional[Dict[str, Any]]:
        if paper.canonical_id.startswith(OPENALEX_PREFIX):
            work_id = paper.canonical_id[len(OPENALEX_PREFIX):]
        elif paper.doi:
            work_id = f"doi:{paper.doi}"
        else:
            return None
        return await self.http.get_json(f"{OPENALEX_API}/works/{work_id}", self._params())

    async def fetch_references(self, paper: PaperRecord, limit: int) -> Optional[List[PaperRecord]]:
        referenced = list(paper.reference_ids or ()) if paper.source is SourceKind.OPENALEX else []
        if not referenced:
            work = await self._resolve(paper)
            if work is None:
                return None
            referenced = list(work.get("referenced_works") or [])
        referenced = [r for r in referenced if r.startswith(OPENALEX_PREFIX)][:limit]

        works: Dict[str, Dict[str, Any]] = {}
        for start in range(0, len(referenced), BATCH_SIZE):
            batch = [r[len(OPENALEX_PREFIX):] for r in referenced[start:start + BATCH_SIZE]]
            params = self._params(filter="openalex:" + "|".join(batch), **{"per-page": len(batch)})
            data = await self.http.get_json(f"{OPENALEX_API}/works", params)
            if data is None:
                continue
            if not isinstance(data, dict) or not isinstance(data.get("results"), list):
                raise SourceParseError("OpenAlex: unexpected response shape")
            for work in data["results"]:
                works[work.get("id") or ""] = work
        records = [parse_work(works[r]) for r in referenced if r in works]
        return [r for r in records if r is not None]
