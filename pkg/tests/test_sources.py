"""Tests for the academic source adapters against recorded payloads."""

import json

import httpx
import pytest
from tenacity import wait_none

from spar.errors import PreconditionError, SourceParseError
from spar.models.paper import PaperRecord, SourceKind
from spar.models.query import TemporalConstraint
from spar.services.http import SourceHttpClient
from spar.services.sources import (
    ArxivAdapter,
    FixtureWebProvider,
    OpenAlexAdapter,
    PubMedAdapter,
    SearchPage,
    SemanticScholarAdapter,
    WebSearchAdapter,
)
from spar.services.sources.arxiv import build_search_query
from spar.services.sources.base import as_reference
from spar.services.sources.openalex import reconstruct_abstract

from helpers import make_record

ANY_TIME = TemporalConstraint()


class Router:
    """MockTransport handler serving fixture payloads by URL path suffix."""

    def __init__(self, routes):
        self.routes = routes
        self.requests = []

    def __call__(self, request):
        self.requests.append(request)
        for suffix, payload in self.routes.items():
            if request.url.path.endswith(suffix):
                if isinstance(payload, (dict, list)):
                    return httpx.Response(200, json=payload)
                return httpx.Response(200, text=payload)
        return httpx.Response(404)


def http_for(router):
    return SourceHttpClient(
        name="test",
        client=httpx.AsyncClient(transport=httpx.MockTransport(router)),
        retry_wait=wait_none(),
    )


@pytest.fixture
def payload(read_fixture):
    def load(name):
        text = read_fixture(f"http/{name}")
        return json.loads(text) if name.endswith(".json") else text

    return load


# OpenAlex

@pytest.mark.asyncio
async def test_openalex_search(payload):
    router = Router({"/works": payload("openalex_search.json")})
    adapter = OpenAlexAdapter(http_for(router), mailto="me@example.org")

    page = await adapter.search("target networks", ANY_TIME, 20)

    assert isinstance(page, SearchPage)
    assert page.total_available == 3
    first, second, third = page.records
    assert first.canonical_id == "10.1000/oa.2021.1"
    assert first.abstract == "Target networks stabilize learning."
    assert first.authors == ("Ada Byron", "Alan Turing")
    assert first.venue == "Journal of Machine Learning Research"
    assert first.field == "Computer Science"
    assert first.citation_count == 140
    assert len(first.reference_ids) == 4
    assert second.canonical_id == "https://openalex.org/W3002"
    assert second.venue is None
    assert second.abstract == ""
    assert third.title == "Human-level control through deep reinforcement learning"
    params = router.requests[0].url.params
    assert params["search"] == "target networks"
    assert params["per-page"] == "20"
    assert params["mailto"] == "me@example.org"
    assert "filter" not in params


@pytest.mark.asyncio
async def test_openalex_date_filter_and_post_filter(payload):
    """Native date filters are sent and the year post-filter still applies."""
    router = Router({"/works": payload("openalex_search.json")})
    adapter = OpenAlexAdapter(http_for(router))

    page = await adapter.search("q", TemporalConstraint.from_years(2015, 2022), 20)

    assert [r.year for r in page.records] == [2021, 2019]
    assert router.requests[0].url.params["filter"] == (
        "from_publication_date:2015-01-01,to_publication_date:2022-12-31"
    )


@pytest.mark.asyncio
async def test_openalex_search_truncates_to_limit(payload):
    adapter = OpenAlexAdapter(http_for(Router({"/works": payload("openalex_search.json")})))

    page = await adapter.search("q", ANY_TIME, 1)

    assert len(page.records) == 1
    with pytest.raises(PreconditionError):
        await adapter.search("q", ANY_TIME, 0)


@pytest.mark.asyncio
async def test_openalex_references_in_cited_order(payload):
    router = Router({"/works": payload("openalex_references.json")})
    adapter = OpenAlexAdapter(http_for(router))
    paper = make_record(
        "W3001",
        canonical_id="10.1000/oa.2021.1",
        reference_ids=tuple(f"https://openalex.org/W{i}" for i in (10, 11, 12, 13)),
    )

    references = await adapter.fetch_references(paper, 50)

    assert [r.title for r in references] == ["Reference Ten", "Reference Eleven", "Reference Twelve", "Reference Thirteen"]
    assert references[3].canonical_id == "https://openalex.org/W13"
    assert router.requests[0].url.params["filter"] == "openalex:W10|W11|W12|W13"

    limited = await adapter.fetch_references(paper, 2)
    assert [r.title for r in limited] == ["Reference Ten", "Reference Eleven"]


@pytest.mark.asyncio
async def test_openalex_references_resolve_by_doi(payload):
    """A record from another source is resolved through its DOI first."""
    work = {"id": "https://openalex.org/W3001", "title": "T", "referenced_works": ["https://openalex.org/W10"]}
    router = Router({"/works/doi:10.1609/aaai.v30i1.10295": work, "/works": payload("openalex_references.json")})
    adapter = OpenAlexAdapter(http_for(router))
    paper = make_record("X", canonical_id="10.1609/aaai.v30i1.10295", source=SourceKind.SEMANTIC_SCHOLAR)

    references = await adapter.fetch_references(paper, 50)

    assert [r.title for r in references] == ["Reference Ten"]
    unresolvable = make_record("Y", canonical_id="arXiv:1312.5602", source=SourceKind.ARXIV)
    assert await adapter.fetch_references(unresolvable, 50) is None


@pytest.mark.asyncio
async def test_openalex_malformed_response():
    adapter = OpenAlexAdapter(http_for(Router({"/works": {"unexpected": True}})))

    with pytest.raises(SourceParseError):
        await adapter.search("q", ANY_TIME, 5)


def test_reconstruct_abstract():
    assert reconstruct_abstract({"world": [1], "hello": [0], "again": [2]}) == "hello world again"
    assert reconstruct_abstract(None) == ""


# Semantic Scholar

@pytest.mark.asyncio
async def test_semantic_scholar_search(payload):
    router = Router({"/paper/search": payload("s2_search.json")})
    adapter = SemanticScholarAdapter(http_for(router))

    page = await adapter.search("double q-learning", TemporalConstraint.from_years(lower=2015), 10)

    first, second = page.records
    assert first.canonical_id == "10.1609/aaai.v30i1.10295"
    assert first.authors == ("Hado van Hasselt", "Arthur Guez")
    assert first.field == "Computer Science"
    assert second.canonical_id == "S2:def456"
    assert second.venue is None
    assert second.abstract == ""
    params = router.requests[0].url.params
    assert params["year"] == "2015-"
    assert params["limit"] == "10"
    assert "citationCount" in params["fields"]


@pytest.mark.asyncio
async def test_semantic_scholar_references(payload):
    router = Router({"/references": payload("s2_references.json")})
    adapter = SemanticScholarAdapter(http_for(router))

    references = await adapter.fetch_references(make_record("X", canonical_id="S2:def456"), 100)

    assert len(references) == 4
    assert references[2].canonical_id == "10.1109/9.580874"
    assert references[0].citation_count == 12000
    assert router.requests[0].url.path.endswith("/paper/def456/references")


def test_semantic_scholar_paper_ids():
    """Records from any source map onto Graph API identifiers."""
    paper_id = SemanticScholarAdapter.paper_id
    assert paper_id(make_record("X", canonical_id="S2:abc")) == "abc"
    assert paper_id(make_record("X", canonical_id="https://doi.org/10.1000/X")) == "DOI:10.1000/x"
    assert paper_id(make_record("X", canonical_id="arXiv:1509.06461")) == "ARXIV:1509.06461"
    assert paper_id(make_record("X", canonical_id="PMID:25096633")) == "PMID:25096633"
    assert paper_id(make_record("X", canonical_id="https://openalex.org/W1")) is None


@pytest.mark.asyncio
async def test_semantic_scholar_unknown_paper():
    adapter = SemanticScholarAdapter(http_for(Router({})))

    assert await adapter.fetch_references(make_record("X", canonical_id="S2:gone"), 10) is None
    assert await adapter.fetch_references(make_record("X", canonical_id="https://openalex.org/W1"), 10) is None


# PubMed

@pytest.mark.asyncio
async def test_pubmed_search(payload):
    router = Router({
        "/esearch.fcgi": payload("pubmed_esearch.json"),
        "/efetch.fcgi": payload("pubmed_efetch.xml"),
    })
    adapter = PubMedAdapter(http_for(router))

    page = await adapter.search("(gene editing) AND ethics", ANY_TIME, 20)

    assert page.total_available == 2
    thalassemia, review = page.records
    assert thalassemia.canonical_id == "PMID:25096633"
    assert thalassemia.year == 2014
    assert thalassemia.authors == ("Fei Xie", "Lin Ye")
    assert thalassemia.abstract == (
        "BACKGROUND: β-thalassemia is caused by mutations in the HBB gene. "
        "RESULTS: Gene-corrected cells restored HBB expression."
    )
    assert thalassemia.venue == "Genome research"
    assert review.canonical_id == "10.1038/s41392-019-0089-y"
    assert review.year == 2019
    assert review.authors == ("Hongyi Li", "Genome Editing Consortium")
    assert review.field == "Gene Editing"
    assert router.requests[1].url.params["id"] == "25096633,31974345"


@pytest.mark.asyncio
async def test_pubmed_date_params_and_empty_result():
    empty = {"esearchresult": {"count": "0", "idlist": []}}
    router = Router({"/esearch.fcgi": empty})
    adapter = PubMedAdapter(http_for(router))

    page = await adapter.search("q", TemporalConstraint.from_years(2020, 2025), 5)

    assert page.records == ()
    assert len(router.requests) == 1
    params = router.requests[0].url.params
    assert (params["datetype"], params["mindate"], params["maxdate"]) == ("pdat", "2020/01/01", "2025/12/31")


@pytest.mark.asyncio
async def test_pubmed_malformed_responses():
    with pytest.raises(SourceParseError):
        await PubMedAdapter(http_for(Router({"/esearch.fcgi": {"error": "bad"}}))).search("q", ANY_TIME, 5)
    broken = Router({
        "/esearch.fcgi": {"esearchresult": {"count": "1", "idlist": ["1"]}},
        "/efetch.fcgi": "<PubmedArticleSet><unclosed>",
    })
    with pytest.raises(SourceParseError):
        await PubMedAdapter(http_for(broken)).search("q", ANY_TIME, 5)


def test_pubmed_build_query():
    assert PubMedAdapter(None).build_query(["gene editing", "ethics", "CRISPR-Cas9"]) == (
        "(gene editing) AND ethics AND CRISPR-Cas9"
    )
    assert OpenAlexAdapter(None).build_query(["gene editing", "ethics"]) == "gene editing ethics"


# arXiv

@pytest.mark.asyncio
async def test_arxiv_search(payload):
    router = Router({"/api/query": payload("arxiv_feed.xml")})
    adapter = ArxivAdapter(http_for(router))

    page = await adapter.search("linear function approximation", ANY_TIME, 10)

    assert page.total_available == 2
    unifying, double = page.records
    assert unifying.canonical_id == "arXiv:2503.01234"
    assert unifying.title == (
        "A Unifying View of Linear Function Approximation in Off-Policy RL "
        "Through Matrix Splitting and Preconditioning"
    )
    assert unifying.year == 2025
    assert unifying.venue == "arXiv"
    assert unifying.field == "cs.LG"
    assert unifying.url == "https://arxiv.org/abs/2503.01234"
    assert double.canonical_id == "10.1609/aaai.v30i1.10295"
    assert double.venue == "AAAI 2016"
    params = router.requests[0].url.params
    assert params["search_query"] == "all:linear AND all:function AND all:approximation"
    assert params["max_results"] == "10"


@pytest.mark.asyncio
async def test_arxiv_year_post_filter(payload):
    adapter = ArxivAdapter(http_for(Router({"/api/query": payload("arxiv_feed.xml")})))

    page = await adapter.search("q", TemporalConstraint.from_years(2020, 2025), 10)

    assert [r.year for r in page.records] == [2025]


def test_arxiv_query_building():
    assert build_search_query("What are target networks?", ANY_TIME) == "all:target AND all:networks"
    assert build_search_query("target networks", TemporalConstraint.from_years(2020, 2025)) == (
        "(all:target AND all:networks) AND submittedDate:[202001010000 TO 202512312359]"
    )
    assert build_search_query("the of and", ANY_TIME) == "all:*"


@pytest.mark.asyncio
async def test_arxiv_malformed_feed():
    with pytest.raises(SourceParseError):
        await ArxivAdapter(http_for(Router({"/api/query": "<feed"}))).search("q", ANY_TIME, 5)


# Web

@pytest.mark.asyncio
async def test_web_adapter_maps_results():
    """Web hits become records by title and URL; unknown years survive date filters."""
    provider = FixtureWebProvider({
        "federated learning": [
            {"title": "<b>Federated</b> Learning Survey", "url": "https://example.org/fl", "snippet": "s"},
            {"title": "", "url": "https://example.org/empty"},
        ],
    })
    adapter = WebSearchAdapter(provider)

    page = await adapter.search("federated learning", TemporalConstraint.from_years(2020, 2025), 10)

    assert len(page.records) == 1
    record = page.records[0]
    assert record.title == "Federated Learning Survey"
    assert record.canonical_id == record.url == "https://example.org/fl"
    assert record.source is SourceKind.GOOGLE
    assert record.abstract == ""
    assert (await WebSearchAdapter().search("anything", ANY_TIME, 5)).records == ()


def test_search_page_checks_records():
    record = make_record("X", source=SourceKind.PUBMED)
    with pytest.raises(PreconditionError):
        SearchPage(records=(record,), source=SourceKind.ARXIV, query_used="q")
    with pytest.raises(PreconditionError):
        SearchPage(records=(as_reference(record, record),), source=SourceKind.PUBMED, query_used="q")


def test_as_reference():
    parent = make_record("P")
    child = as_reference(make_record("C", source=SourceKind.SEMANTIC_SCHOLAR), parent)

    assert child.refchain_depth == 1
    assert child.retrieved_by == parent.canonical_id
    assert isinstance(child, PaperRecord)
