"""PubMed E-utilities adapter (esearch + efetch)."""

import re
import xml.etree.ElementTree as ET
from typing import List, Optional, Sequence, Tuple

from ...errors import SourceParseError
from ...models.paper import PaperRecord, SourceKind, extract_doi
from ...models.query import TemporalConstraint
from .base import SourceAdapter, clean_text

EUTILS = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils"
_YEAR = re.compile(r"(\d{4})")


def _text(element: Optional[ET.Element]) -> str:
    if element is None:
        return ""
    return clean_text("".join(element.itertext()))


def parse_article(article: ET.Element) -> Optional[PaperRecord]:
    title = _text(article.find(".//ArticleTitle"))
    pmid = _text(article.find(".//MedlineCitation/PMID"))
    if not title or not pmid:
        return None

    abstract_parts = []
    for part in article.findall(".//Abstract/AbstractText"):
        label = part.get("Label")
        text = _text(part)
        if text:
            abstract_parts.append(f"{label}: {text}" if label else text)

    authors = []
    for author in article.findall(".//AuthorList/Author"):
        last = _text(author.find("LastName"))
        fore = _text(author.find("ForeName"))
        collective = _text(author.find("CollectiveName"))
        name = f"{fore} {last}".strip() or collective
        if name:
            authors.append(name)

    year = None
    pub_date = article.find(".//JournalIssue/PubDate")
    if pub_date is not None:
        match = _YEAR.search(_text(pub_date.find("Year")) or _text(pub_date.find("MedlineDate")))
        year = int(match.group(1)) if match else None

    doi = None
    for article_id in article.findall(".//PubmedData/ArticleIdList/ArticleId"):
        if article_id.get("IdType") == "doi":
            doi = extract_doi(_text(article_id))
    mesh = [_text(d) for d in article.findall(".//MeshHeadingList/MeshHeading/DescriptorName")]

    return PaperRecord(
        canonical_id=doi or f"PMID:{pmid}",
        title=title,
        abstract=" ".join(abstract_parts),
        authors=tuple(authors),
        year=year,
        venue=_text(article.find(".//Journal/Title")) or None,
        source=SourceKind.PUBMED,
        url=f"https://pubmed.ncbi.nlm.nih.gov/{pmid}/",
        field=mesh[0] if mesh else None,
    )


def parse_efetch(xml_content: str) -> List[PaperRecord]:
    try:
        root = ET.fromstring(xml_content)
    except ET.ParseError as e:
        raise SourceParseError(f"PubMed: malformed efetch XML ({e})") from e
    records = [parse_article(article) for article in root.findall(".//PubmedArticle")]
    return [r for r in records if r is not None]


def date_params(temporal: TemporalConstraint) -> dict:
    if not temporal.lower and not temporal.upper:
        return {}
    lower = temporal.lower.strftime("%Y/%m/%d") if temporal.lower else "1800/01/01"
    upper = temporal.upper.strftime("%Y/%m/%d") if temporal.upper else "3000/12/31"
    return {"datetype": "pdat", "mindate": lower, "maxdate": upper}


class PubMedAdapter(SourceAdapter):
    kind = SourceKind.PUBMED

    def build_query(self, keywords: Sequence[str]) -> str:
        return " AND ".join(f"({k})" if " " in k else k for k in keywords)

    async def _search(
        self, query: str, temporal: TemporalConstraint, limit: int
    ) -> Tuple[List[PaperRecord], Optional[int]]:
        params = {"db": "pubmed", "term": query, "retmax": limit, "retmode": "json", **date_params(temporal)}
        data = await self.http.get_json(f"{EUTILS}/esearch.fcgi", params)
        if not isinstance(data, dict) or "esearchresult" not in data:
            raise SourceParseError("PubMed: unexpected esearch response")
        result = data["esearchresult"]
        ids = result.get("idlist") or []
        total = int(result["count"]) if str(result.get("count", "")).isdigit() else None
        if not ids:
            return [], total

        xml_content = await self.http.get_text(
            f"{EUTILS}/efetch.fcgi", {"db": "pubmed", "id": ",".join(ids), "retmode": "xml"}
        )
        if xml_content is None:
            return [], total
        records = parse_efetch(xml_content)
        order = {f"https://pubmed.ncbi.nlm.nih.gov/{pmid}/": i for i, pmid in enumerate(ids)}
        records.sort(key=lambda r: order.get(r.url, len(order)))
        return records, total
