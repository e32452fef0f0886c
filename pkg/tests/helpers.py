"""Test doubles and the scripted retrieval corpus shared by the test modules."""

import dataclasses
import json
import re
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Union

from tenacity import wait_none

from spar.agents.orchestrator import Orchestrator
from spar.config.settings import LLMMode, RunConfig
from spar.models.paper import PaperRecord, SourceKind
from spar.services.llm.gateway import Cassette, ChatRequest, LLMGateway
from spar.services.pipeline import assemble
from spar.services.sources.base import SourceAdapter

Responder = Callable[[ChatRequest], Union[str, Exception]]


def bindings(request: ChatRequest) -> Dict[str, str]:
    return dict(request.bindings)


class ScriptedTransport:
    """Chat transport answering from a function of the request; exceptions returned are raised."""

    def __init__(self, responder: Responder):
        self.responder = responder
        self.requests: List[ChatRequest] = []

    async def send(self, request: ChatRequest) -> str:
        self.requests.append(request)
        result = self.responder(request)
        if isinstance(result, Exception):
            raise result
        return result

    def of_template(self, template_id: str) -> List[ChatRequest]:
        return [r for r in self.requests if r.template_id == template_id]


def make_gateway(
    responder: Responder,
    mode: LLMMode = LLMMode.LIVE,
    cassette: Optional[Cassette] = None,
) -> LLMGateway:
    return LLMGateway(
        transport=ScriptedTransport(responder),
        mode=mode,
        cassette=cassette,
        model="test-model",
        retry_wait=wait_none(),
    )


class FakeAdapter(SourceAdapter):
    """In-memory source: results by submitted query, references by canonical id."""

    def __init__(
        self,
        kind: SourceKind,
        results: Optional[Mapping[str, Sequence[PaperRecord]]] = None,
        references: Optional[Mapping[str, Sequence[PaperRecord]]] = None,
        errors: Optional[Mapping[str, Exception]] = None,
    ):
        self.kind = kind
        super().__init__(http=None)
        self.results = dict(results or {})
        self.references = dict(references or {})
        self.errors = dict(errors or {})
        self.queries: List[str] = []
        self.reference_requests: List[str] = []

    async def _search(self, query, temporal, limit):
        self.queries.append(query)
        if query in self.errors:
            raise self.errors[query]
        records = [dataclasses.replace(r, source=self.kind) for r in self.results.get(query, [])]
        return records, len(records)

    async def fetch_references(self, paper, limit):
        self.reference_requests.append(paper.canonical_id)
        if paper.canonical_id in self.errors:
            raise self.errors[paper.canonical_id]
        references = self.references.get(paper.canonical_id)
        return None if references is None else list(references)[:limit]


def make_record(
    label: str,
    source: SourceKind = SourceKind.OPENALEX,
    year: Optional[int] = 2020,
    citations: Optional[int] = 10,
    **fields,
) -> PaperRecord:
    """A record titled "Paper <label>" with DOI 10.1000/<label>."""
    values = dict(
        canonical_id=f"10.1000/{label.lower()}",
        title=f"Paper {label}",
        source=source,
        abstract=f"Abstract of {label}.",
        authors=("Ann Lee", "Bo Chen"),
        year=year,
        venue="Test Venue",
        citation_count=citations,
    )
    values.update(fields)
    return PaperRecord(**values)


# Scripted corpus: one question, two iterations, cache fills on the second.

QUESTION = "How do target networks stabilize off-policy deep reinforcement learning?"
REFINEMENT = "target network stabilization"
EVOLVED_REPLAY = "replay buffer size effects"
EVOLVED_DOUBLE = "double q-learning overestimation"
EVOLVED_SOFT = "soft target updates polyak averaging"

INTERPRETATION = f"""User Query: {QUESTION}
Query Intent: Understand the mechanism by which target networks stabilize training
Domain: Reinforcement learning
Time Requirement Description: NO
Suitable Sources: OpenAlex, Semantic Scholar
Source Reason: Both index machine learning venues.
Needs Expansion: true
Expansion Reason: The question names a specific technique.
Expanded Queries:
- {REFINEMENT}
"""

SCORES = {
    "D01": 0.95, "D02": 0.9, "D03": 0.3, "D04": 0.85, "D05": 0.8, "D06": 0.2,
    "D07": 0.75, "D08": 0.7, "D09": 0.4, "D10": 0.65, "D11": 0.6, "D12": 0.1,
    "D13": 0.92, "D14": 0.55, "D15": 0.2, "D16": 0.83, "D17": 0.35,
    "D18": 0.97, "D19": 0.5, "D20": 0.15,
    "D21": 0.58, "D22": 0.1, "D23": 0.1, "D24": 0.1, "D25": 0.1,
    "R01": 0.88, "R02": 0.45, "R03": 0.5, "R04": 0.91, "R05": 0.3,
}

EVOLUTIONS = {
    "Paper D01": [EVOLVED_REPLAY, EVOLVED_DOUBLE],
    "Paper R01": [EVOLVED_SOFT],
}

RERANK = {"D07": "9.9"}

EXPECTED_CACHE = ["D18", "D01", "D13", "R04", "D02", "R01", "D04", "D16", "D05", "D07"]
EXPECTED_RANKING = ["D07", "D18", "D01", "D13", "R04", "D02", "R01", "D04", "D16", "D05"]

_DOC_LINE = re.compile(r"^Document (\d+): Paper (\w+) .* relevance: ([\d.]+)$", re.MULTILINE)


def label_of(record: PaperRecord) -> str:
    return record.title.split()[-1]


def corpus_responder(
    request: ChatRequest,
    interpretation: str = INTERPRETATION,
    scores: Optional[Mapping[str, float]] = None,
    rerank: Optional[Mapping[str, str]] = None,
) -> str:
    scores = SCORES if scores is None else scores
    rerank = RERANK if rerank is None else rerank
    values = bindings(request)
    template = request.template_id
    if template == "QueryInterpretation":
        return interpretation
    if template == "KeywordExtraction":
        return f"[Start] {values['user_query']} [End]"
    if template == "RelevanceBrief":
        label = values["title"].split()[-1]
        return f"Reasoning: scripted judgement for {label}.\nScore: {scores[label]}"
    if template == "QueryEvolution":
        return "Here are the queries:\n" + json.dumps(EVOLUTIONS.get(values["doc_title"], []))
    if template in ("RerankNoTime", "RerankWithTime"):
        lines = []
        for index, label, relevance in _DOC_LINE.findall(values["doc_list"]):
            lines.append(f"Document {index}: {rerank.get(label, relevance)} - scripted")
        return "\n".join(lines)
    raise AssertionError(f"unexpected template {template}")


def corpus_adapters() -> Dict[SourceKind, FakeAdapter]:
    d = {f"D{i:02d}": make_record(f"D{i:02d}") for i in range(1, 26)}
    r = {f"R{i:02d}": make_record(f"R{i:02d}", source=SourceKind.SEMANTIC_SCHOLAR, year=2015) for i in range(1, 6)}

    def pick(*labels: str) -> List[PaperRecord]:
        return [d[label] for label in labels]

    openalex = FakeAdapter(
        SourceKind.OPENALEX,
        results={
            QUESTION: pick("D01", "D02", "D03", "D04", "D05", "D06"),
            REFINEMENT: pick("D09", "D10", "D11", "D12"),
            EVOLVED_REPLAY: pick("D13", "D14", "D15"),
            EVOLVED_SOFT: pick("D18", "D19", "D20"),
        },
    )
    s2 = FakeAdapter(
        SourceKind.SEMANTIC_SCHOLAR,
        results={
            QUESTION: pick("D04", "D05", "D06", "D07", "D08"),
            EVOLVED_DOUBLE: pick("D16", "D17", "D01"),
        },
        references={
            "10.1000/d01": [r["R01"], r["R02"], dataclasses.replace(d["D03"], source=SourceKind.SEMANTIC_SCHOLAR)],
            "10.1000/d02": [r["R03"]],
            "10.1000/d18": [r["R04"], r["R05"]],
        },
    )
    pubmed = FakeAdapter(SourceKind.PUBMED, results={QUESTION: pick("D21", "D22", "D23", "D24", "D25")})
    arxiv = FakeAdapter(SourceKind.ARXIV)
    return {
        SourceKind.OPENALEX: openalex,
        SourceKind.SEMANTIC_SCHOLAR: s2,
        SourceKind.PUBMED: pubmed,
        SourceKind.ARXIV: arxiv,
    }


def corpus_config(**overrides) -> RunConfig:
    values = dict(cache_target=10, subset_size=5, threshold=0.5, llm_model="test-model", judge_model="test-model")
    values.update(overrides)
    return RunConfig(**values)


def corpus_orchestrator(
    config: Optional[RunConfig] = None,
    responder: Responder = corpus_responder,
    adapters: Optional[Dict[SourceKind, FakeAdapter]] = None,
    gateway: Optional[LLMGateway] = None,
) -> Orchestrator:
    config = config or corpus_config()
    gateway = gateway or make_gateway(responder)
    return assemble(config, gateway, adapters if adapters is not None else corpus_adapters())
