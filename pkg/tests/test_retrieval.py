"""Tests for the retrieval agent."""

import random

import pytest

from spar.agents.retrieval import RetrievalAgent, merge_dedup
from spar.config.settings import RunConfig
from spar.errors import CassetteMiss, PreconditionError, SourceRateLimited, SourceTransportError, WrongSourceKind
from spar.models.paper import SourceKind, dedup_key
from spar.models.query import TemporalConstraint
from spar.services.sources.base import SearchPage

from helpers import FakeAdapter, bindings, make_gateway, make_record

ANY_TIME = TemporalConstraint()
QUERY = "ethical challenges of gene editing"


def keyword_responder(request):
    values = bindings(request)
    if request.template_id == "KeywordExtraction":
        return "[Start] gene editing, ethics [End]"
    if request.template_id == "QueryRefinement":
        return f"[Generated Search Query]: {values['UserQuery']} site:scholar"
    raise AssertionError(request.template_id)


def agent_for(adapters, responder=keyword_responder, **config):
    return RetrievalAgent(make_gateway(responder), adapters, RunConfig(**config))


def test_merge_dedup_first_wins_and_backfills():
    """The first occurrence keeps its place; its empty fields are filled from later duplicates."""
    sparse = make_record("A", abstract="", year=None, citations=None, venue=None)
    rich = make_record("A", source=SourceKind.SEMANTIC_SCHOLAR, abstract="Full abstract.", year=2021, citations=40)
    other = make_record("B")

    merged = merge_dedup([[sparse, other], [rich]])

    assert [r.title for r in merged] == ["Paper A", "Paper B"]
    assert merged[0].source is SourceKind.OPENALEX
    assert merged[0].abstract == "Full abstract."
    assert merged[0].year == 2021
    assert merged[0].citation_count == 40
    assert merged[0].venue == "Test Venue"


def test_merge_dedup_by_title_without_doi():
    a = make_record("A", canonical_id="S2:1", title="Deep Q-Networks")
    b = make_record("B", canonical_id="arXiv:1", title="deep q-networks.", source=SourceKind.ARXIV)
    page = SearchPage(records=(a,), source=SourceKind.OPENALEX, query_used="q")

    assert merge_dedup([page, [b]]) == [a]


def test_merge_dedup_keeps_every_key_and_is_idempotent():
    rng = random.Random(8)
    sources = list(SourceKind)
    for _ in range(300):
        pages = []
        for _ in range(rng.randint(0, 4)):
            page = []
            for _ in range(rng.randint(0, 8)):
                label = rng.choice("ABCDEFGH")
                by_title = rng.random() < 0.3
                page.append(
                    make_record(
                        label,
                        source=rng.choice(sources),
                        canonical_id=f"S2:{rng.randint(0, 99)}" if by_title else f"10.1000/{label.lower()}",
                        abstract=rng.choice(["", f"Abstract of {label}."]),
                        year=rng.choice([None, 2018, 2021]),
                        citations=rng.choice([None, 0, 12]),
                    )
                )
            pages.append(page)

        merged = merge_dedup(pages)

        first_seen = list(dict.fromkeys(dedup_key(r) for page in pages for r in page))
        assert [dedup_key(r) for r in merged] == first_seen
        assert merge_dedup([merged]) == merged
        assert merge_dedup([merged, *pages]) == merged


@pytest.mark.asyncio
async def test_keyword_sources_get_keywords():
    pubmed = FakeAdapter(SourceKind.PUBMED, results={"gene editing ethics": [make_record("P1")]})
    agent = agent_for({SourceKind.PUBMED: pubmed})

    page = await agent.search(SourceKind.PUBMED, QUERY, ANY_TIME)

    assert page.query_used == "gene editing ethics"
    assert [r.title for r in page.records] == ["Paper P1"]
    request = agent.gateway.transport.requests[0]
    assert bindings(request) == {"source": "PubMed", "user_query": QUERY}
    assert agent.search_calls == 1
    assert list(agent.raw_records) == ["10.1000/p1"]


@pytest.mark.asyncio
async def test_full_string_sources_skip_keywords():
    arxiv = FakeAdapter(SourceKind.ARXIV, results={QUERY: [make_record("X1")]})
    web = FakeAdapter(SourceKind.GOOGLE, results={QUERY: [make_record("G1")]})
    agent = agent_for({SourceKind.ARXIV: arxiv, SourceKind.GOOGLE: web})

    await agent.search(SourceKind.ARXIV, QUERY, ANY_TIME)
    await agent.search(SourceKind.GOOGLE, QUERY, ANY_TIME)

    assert arxiv.queries == [QUERY]
    assert web.queries == [QUERY]
    assert agent.gateway.transport.requests == []


@pytest.mark.asyncio
async def test_web_query_refinement_when_enabled():
    web = FakeAdapter(SourceKind.GOOGLE)
    agent = agent_for({SourceKind.GOOGLE: web}, refine_web_queries=True)

    await agent.search(SourceKind.GOOGLE, QUERY, ANY_TIME)

    assert web.queries == [f"{QUERY} site:scholar"]


@pytest.mark.asyncio
async def test_web_query_refinement_failure_falls_back():
    web = FakeAdapter(SourceKind.GOOGLE)
    agent = agent_for({SourceKind.GOOGLE: web}, responder=lambda request: "", refine_web_queries=True)

    await agent.search(SourceKind.GOOGLE, QUERY, ANY_TIME)

    assert web.queries == [QUERY]
    assert len(agent.warnings) == 1


@pytest.mark.asyncio
async def test_extract_keywords_rules():
    """Full-string sources are refused; a malformed completion is asked again once."""
    replies = ["no markers here", "[Start] crispr [End]"]
    agent = agent_for({}, responder=lambda request: replies.pop(0))

    with pytest.raises(WrongSourceKind):
        await agent.extract_keywords(QUERY, SourceKind.ARXIV)
    assert await agent.extract_keywords(QUERY, SourceKind.OPENALEX) == ["crispr"]
    assert [r.attempt for r in agent.gateway.transport.requests] == [0, 1]


@pytest.mark.asyncio
async def test_search_preconditions():
    agent = agent_for({SourceKind.ARXIV: FakeAdapter(SourceKind.ARXIV)}, source_page_cap=50, source_limit=20)

    with pytest.raises(PreconditionError):
        await agent.search(SourceKind.ARXIV, QUERY, ANY_TIME, limit=51)
    with pytest.raises(PreconditionError):
        await agent.search(SourceKind.PUBMED, QUERY, ANY_TIME)


@pytest.mark.asyncio
async def test_search_all_order_and_failures():
    """Pages come back in query-then-source order; a failing source becomes a warning."""
    arxiv = FakeAdapter(
        SourceKind.ARXIV,
        results={"q1": [make_record("A1")], "q2": [make_record("A2")]},
        errors={"q2": SourceRateLimited("busy", retry_after=3)},
    )
    web = FakeAdapter(SourceKind.GOOGLE, results={"q1": [make_record("G1")], "q2": [make_record("G2")]})
    agent = agent_for({SourceKind.ARXIV: arxiv, SourceKind.GOOGLE: web})

    pages = await agent.search_all(["q1", "q2"], [SourceKind.ARXIV, SourceKind.GOOGLE], ANY_TIME)

    assert [(p.source, p.query_used) for p in pages] == [
        (SourceKind.ARXIV, "q1"),
        (SourceKind.GOOGLE, "q1"),
        (SourceKind.GOOGLE, "q2"),
    ]
    assert len(agent.drain_warnings()) == 1


@pytest.mark.asyncio
async def test_search_all_propagates_cassette_miss():
    agent = agent_for(
        {SourceKind.PUBMED: FakeAdapter(SourceKind.PUBMED)},
        responder=lambda request: CassetteMiss("0" * 64),
    )

    with pytest.raises(CassetteMiss):
        await agent.search_all([QUERY], [SourceKind.PUBMED], ANY_TIME)


@pytest.mark.asyncio
async def test_fetch_references_priority_and_fallback():
    """Semantic Scholar is asked first; failures and unknown papers fall through to OpenAlex."""
    parent = make_record("P")
    s2 = FakeAdapter(
        SourceKind.SEMANTIC_SCHOLAR,
        references={"10.1000/p": [make_record("R1", source=SourceKind.SEMANTIC_SCHOLAR)]},
    )
    openalex = FakeAdapter(SourceKind.OPENALEX, references={"10.1000/q": [make_record("R2")]})
    agent = agent_for({SourceKind.SEMANTIC_SCHOLAR: s2, SourceKind.OPENALEX: openalex})

    references = await agent.fetch_references(parent)
    assert [(r.title, r.refchain_depth, r.retrieved_by) for r in references] == [("Paper R1", 1, "10.1000/p")]
    assert openalex.reference_requests == []

    fallback = await agent.fetch_references(make_record("Q"))
    assert [r.title for r in fallback] == ["Paper R2"]

    s2.errors["10.1000/q"] = SourceTransportError("down")
    assert [r.title for r in await agent.fetch_references(make_record("Q"))] == ["Paper R2"]
    assert len(agent.drain_warnings()) == 1

    assert await agent.fetch_references(make_record("Z")) == []
    assert agent.raw_records["10.1000/r1"].refchain_depth == 1


@pytest.mark.asyncio
async def test_empty_reference_list_falls_through():
    """A source that knows the paper but lists no references does not end the lookup."""
    s2 = FakeAdapter(SourceKind.SEMANTIC_SCHOLAR, references={"10.1000/p": []})
    openalex = FakeAdapter(SourceKind.OPENALEX, references={"10.1000/p": [make_record("R2")]})
    agent = agent_for({SourceKind.SEMANTIC_SCHOLAR: s2, SourceKind.OPENALEX: openalex})

    references = await agent.fetch_references(make_record("P"))

    assert [r.title for r in references] == ["Paper R2"]
    assert s2.reference_requests == openalex.reference_requests == ["10.1000/p"]


@pytest.mark.asyncio
async def test_fetch_references_only_for_depth_zero():
    agent = agent_for({})
    child = make_record("C", refchain_depth=1)

    with pytest.raises(PreconditionError):
        await agent.fetch_references(child)


def test_reset_clears_raw_set():
    agent = agent_for({})
    agent.raw_records["k"] = make_record("K")
    agent.search_calls = 3

    agent.reset()

    assert agent.raw_records == {}
    assert agent.search_calls == 0
