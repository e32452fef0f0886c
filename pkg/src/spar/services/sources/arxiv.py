"""arXiv query API adapter (Atom feed)."""

import re
import xml.etree.ElementTree as ET
from typing import List, Optional, Tuple

from ...errors import SourceParseError
from ...models.paper import PaperRecord, SourceKind, extract_doi
from ...models.query import TemporalConstraint
from .base import SourceAdapter, clean_text

ARXIV_API = "https://export.arxiv.org/api/query"
NS = {
    "atom": "http://www.w3.org/2005/Atom",
    "arxiv": "http://arxiv.org/schemas/atom",
    "opensearch": "http://a9.com/-/spec/opensearch/1.1/",
}
_ARXIV_ID = re.compile(r"abs/(.+?)(v\d+)?$")
_UNSAFE = re.compile(r"[\"():\[\]?,.;!]")
STOPWORDS = frozenset(
    "a an and are as at be by can for from how in is it of on or the to what which with any you papers paper".split()
)


def _find(entry: ET.Element, path: str) -> str:
    element = entry.find(path, NS)
    return clean_text(element.text) if element is not None and element.text else ""


def parse_entry(entry: ET.Element) -> Optional[PaperRecord]:
    title = _find(entry, "atom:title")
    match = _ARXIV_ID.search(_find(entry, "atom:id"))
    if not title or not match:
        return None
    arxiv_id = match.group(1)
    published = _find(entry, "atom:published")
    category = entry.find("arxiv:primary_category", NS)
    authors = [_find(a, "atom:name") for a in entry.findall("atom:author", NS)]
    return PaperRecord(
        canonical_id=extract_doi(_find(entry, "arxiv:doi")) or f"arXiv:{arxiv_id}",
        title=title,
        abstract=_find(entry, "atom:summary"),
        authors=tuple(a for a in authors if a),
        year=int(published[:4]) if published[:4].isdigit() else None,
        venue=_find(entry, "arxiv:journal_ref") or "arXiv",
        source=SourceKind.ARXIV,
        url=f"https://arxiv.org/abs/{arxiv_id}",
        field=category.get("term") if category is not None else None,
    )


def parse_feed(xml_content: str) -> Tuple[List[PaperRecord], Optional[int]]:
    try:
        root = ET.fromstring(xml_content)
    except ET.ParseError as e:
        raise SourceParseError(f"arXiv: malformed Atom feed ({e})") from e
    total_text = _find(root, "opensearch:totalResults")
    records = [parse_entry(entry) for entry in root.findall("atom:entry", NS)]
    return [r for r in records if r is not None], int(total_text) if total_text.isdigit() else None


def build_search_query(query: str, temporal: TemporalConstraint) -> str:
    terms = [t for t in _UNSAFE.sub(" ", query).split() if t.lower() not in STOPWORDS and t.upper() != "ANDNOT"]
    search = " AND ".join(f"all:{t}" for t in terms) or "all:*"
    if temporal.lower or temporal.upper:
        lower = temporal.lower.strftime("%Y%m%d0000") if temporal.lower else "190001010000"
        upper = temporal.upper.strftime("%Y%m%d2359") if temporal.upper else "299912312359"
        search = f"({search}) AND submittedDate:[{lower} TO {upper}]"
    return search


class ArxivAdapter(SourceAdapter):
    """Receives the full query string; terms are ANDed over all fields."""

    kind = SourceKind.ARXIV

    async def _search(
        self, query: str, temporal: TemporalConstraint, limit: int
    ) -> Tuple[List[PaperRecord], Optional[int]]:
        params = {
            "search_query": build_search_query(query, temporal),
            "start": 0,
            "max_results": limit,
            "sortBy": "relevance",
            "sortOrder": "descending",
        }
        xml_content = await self.http.get_text(ARXIV_API, params)
        if xml_content is None:
            return [], 0
        return parse_feed(xml_content)
