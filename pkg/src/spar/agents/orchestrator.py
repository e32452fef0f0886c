"""Orchestrator: drives interpretation, the retrieval-expansion loop and reranking."""

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from ..config.settings import RunConfig
from ..errors import GatewayError, InterpretationParseError
from ..models.paper import JudgedPaper, PaperRecord, RankedPaper, SourceKind
from ..models.query import QueryInterpretation, TemporalConstraint, UserQuery
from ..models.state import SearchState
from ..services.llm.gateway import LLMGateway
from .base import BaseAgent
from .judgement import JudgementAgent
from .query_evolver import QueryEvolverAgent
from .query_understanding import QueryUnderstandingAgent, build_query_list, restrict_sources
from .refchain import RefChainAgent
from .reranker import RerankerAgent, unchanged
from .retrieval import RetrievalAgent, merge_dedup

ARTIFACT_EXCLUDED_KEYS = frozenset({"llm_mode", "cassette_dir"})


def select_top_k(pool: Sequence[JudgedPaper], k: int) -> List[JudgedPaper]:
    """
    The K best papers by judge score.

    Ties fall to citation count, then year (both descending, unknown last),
    then dedup key.
    """

    def order(paper: JudgedPaper):
        record = paper.record
        citations = record.citation_count if record.citation_count is not None else -1
        return (-paper.score, -citations, -(record.year or 0), paper.key)

    return sorted(pool, key=order)[:k]


class RunLedger:
    """Ordered trajectory events for one run; the source of the run artifact."""

    def __init__(self):
        self.events: List[Dict[str, Any]] = []

    def record(self, event: str, **data: Any) -> None:
        self.events.append({"seq": len(self.events), "event": event, **data})

    def of_kind(self, event: str) -> List[Dict[str, Any]]:
        return [e for e in self.events if e["event"] == event]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True, ensure_ascii=False) + "\n" for e in self.events)


@dataclass
class IterationSummary:
    iteration: int
    queries: List[str]
    retrieved: int = 0
    admitted: int = 0
    refchain_admitted: int = 0
    pool_size: int = 0
    cache_size: int = 0
    queued: List[str] = field(default_factory=list)


@dataclass
class RunReport:
    """Outcome of one run: final ranking, trajectory and accounting."""

    query: UserQuery
    interpretation: QueryInterpretation
    ranked: List[RankedPaper]
    iterations: List[IterationSummary]
    searched_queries: List[str]
    pool: List[JudgedPaper]
    raw_records: List[PaperRecord]
    warnings: List[str]
    stop_reason: str
    ledger: RunLedger
    call_counts: Dict[str, int] = field(default_factory=dict)
    elapsed_seconds: float = 0.0
    rerank_fell_back: bool = False

    @property
    def records(self) -> List[PaperRecord]:
        return [entry.record for entry in self.ranked]

    @property
    def raw_doc_num(self) -> int:
        return len(self.raw_records)

    @property
    def valid_doc_num(self) -> int:
        return len(self.pool)

    def to_jsonl(self) -> str:
        return self.ledger.to_jsonl()

    def write_artifact(self, path: Union[str, Path]) -> Path:
        """Write the trajectory as one JSON object per line. Timings are not included."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_jsonl(), encoding="utf-8")
        return path


class Orchestrator(BaseAgent):
    """Coordinates the agents for a single query at a time."""

    def __init__(
        self,
        gateway: LLMGateway,
        understanding: QueryUnderstandingAgent,
        retrieval: RetrievalAgent,
        judgement: JudgementAgent,
        refchain: RefChainAgent,
        evolver: QueryEvolverAgent,
        reranker: RerankerAgent,
        config: Optional[RunConfig] = None,
    ):
        super().__init__("Orchestrator", config)
        self.gateway = gateway
        self.understanding = understanding
        self.retrieval = retrieval
        self.judgement = judgement
        self.refchain = refchain
        self.evolver = evolver
        self.reranker = reranker
        self.configure(self.config)

    @property
    def agents(self) -> List[BaseAgent]:
        return [self.understanding, self.retrieval, self.judgement, self.refchain, self.evolver, self.reranker]

    def configure(self, config: RunConfig) -> None:
        """Apply a run configuration to every agent."""
        self.config = config
        for agent in self.agents:
            agent.config = config

    def _start(self) -> None:
        self.retrieval.reset()
        self.judgement.reset()
        self.refchain.reset()
        self.evolver.calls = 0
        self.reranker.calls = 0
        self.reranker.fell_back = False
        for agent in [self, *self.agents]:
            agent.drain_warnings()
        self._gateway_before = dict(self.gateway.stats)

    def _artifact_config(self) -> Dict[str, Any]:
        """Configuration echo without the LLM mode, so recorded and replayed runs match."""
        return {k: v for k, v in self.config.echo().items() if k not in ARTIFACT_EXCLUDED_KEYS}

    def _drain_all_warnings(self) -> List[str]:
        return sorted(w for agent in [self, *self.agents] for w in agent.drain_warnings())

    def _call_counts(self) -> Dict[str, int]:
        counts = {
            f"llm_{name}": self.gateway.stats[name] - self._gateway_before.get(name, 0)
            for name in self.gateway.stats
        }
        counts.update(
            searches=self.retrieval.search_calls,
            reference_fetches=self.retrieval.reference_calls,
            judge_calls=self.judgement.calls,
            evolve_calls=self.evolver.calls,
            rerank_calls=self.reranker.calls,
        )
        return counts

    async def _interpret(self, query: UserQuery, ledger: RunLedger) -> QueryInterpretation:
        fallback = False
        if self.config.toggles.qinterp:
            try:
                interp = await self.understanding.interpret(query)
            except (InterpretationParseError, GatewayError) as e:
                self.understanding.warn(f"interpretation failed, using the query as is: {e}")
                interp = QueryInterpretation.identity(query)
                fallback = True
        else:
            interp = QueryInterpretation.identity(query)
        ledger.record("interpretation", fallback=fallback, **interp.to_dict())
        return interp

    async def _search_iteration(
        self,
        query: UserQuery,
        state: SearchState,
        sources: Sequence[SourceKind],
        temporal: TemporalConstraint,
        ledger: RunLedger,
    ) -> IterationSummary:
        batch = state.take_pending()
        summary = IterationSummary(iteration=state.iteration, queries=batch)
        ledger.record("iteration_start", iteration=state.iteration, queries=batch)

        pages = await self.retrieval.search_all(batch, sources, temporal)
        for page in pages:
            ledger.record(
                "search",
                iteration=state.iteration,
                source=page.source.value,
                query_used=page.query_used,
                keys=[r.canonical_id for r in page.records],
            )
        records = merge_dedup(pages)
        summary.retrieved = len(records)

        judged = await self.judgement.judge_all(query, records)
        for paper in judged:
            ledger.record(
                "judged",
                iteration=state.iteration,
                key=paper.key,
                score=paper.score,
                parse_failed=paper.judgement.parse_failed,
            )
        summary.admitted = state.merge_into_pool(self.judgement.filter_related(judged))
        return summary

    async def run(self, query: UserQuery, config: Optional[RunConfig] = None) -> RunReport:
        """
        Run the full pipeline for one query.

        Stops when the Paper Cache reaches K, after max_iterations, or when
        no query is pending. Source and model failures degrade to warnings;
        CassetteMiss propagates.
        """
        if config is not None:
            self.configure(config)
        config = self.config
        started = time.perf_counter()
        self._start()
        ledger = RunLedger()
        ledger.record(
            "run_start",
            mode="full",
            query=query.text,
            search_time=query.search_time.isoformat() if query.search_time else None,
            config=self._artifact_config(),
        )

        interp = await self._interpret(query, ledger)
        state = SearchState(initial_query=query, interpretation=interp)
        state.enqueue(build_query_list(interp, query))
        sources = restrict_sources(interp.sources, config.sources)
        temporal = interp.temporal.with_cutoff(query.search_time)
        iterations: List[IterationSummary] = []

        stop_reason = "no_pending"
        while state.pending_queries:
            if state.iteration >= config.max_iterations:
                stop_reason = "max_iterations"
                break
            state.iteration += 1
            summary = await self._search_iteration(query, state, sources, temporal, ledger)
            iterations.append(summary)

            if config.toggles.refchain:
                before = len(state.related_pool)
                expanded = await self.refchain.expand(query, state.pool)
                summary.refchain_admitted = state.merge_into_pool(expanded[before:])
                ledger.record(
                    "refchain",
                    iteration=state.iteration,
                    admitted=[p.key for p in expanded[before:]],
                )

            state.set_cache(select_top_k(state.pool, config.cache_target), config.cache_target)
            summary.pool_size = len(state.related_pool)
            summary.cache_size = len(state.paper_cache)
            ledger.record(
                "cache",
                iteration=state.iteration,
                pool_size=summary.pool_size,
                keys=[p.key for p in state.paper_cache],
            )
            if len(state.paper_cache) >= config.cache_target:
                stop_reason = "cache_full"
                break

            if config.toggles.evolution:
                selected = await self.evolver.evolve_cache(
                    query, state.searched_queries, state.pending_queries, state.paper_cache, state.iteration
                )
                summary.queued = state.enqueue(selected)
                ledger.record("evolution", iteration=state.iteration, queued=summary.queued)

        ledger.record("stop", reason=stop_reason, iteration=state.iteration)

        if config.toggles.rerank and state.paper_cache:
            ranked = await self.reranker.rerank(query, state.paper_cache, interp.temporal.required)
            ledger.record("rerank", fell_back=self.reranker.fell_back, keys=[r.paper.key for r in ranked])
        else:
            ranked = unchanged(state.paper_cache)

        return self._finish(query, interp, state, ranked, iterations, stop_reason, ledger, started)

    async def run_baseline(
        self, query: UserQuery, source: SourceKind, config: Optional[RunConfig] = None
    ) -> RunReport:
        """
        Single-source baseline: keyword extraction, one search, judge and filter.

        Every paper above the threshold is returned, best first.
        """
        if config is not None:
            self.configure(config)
        started = time.perf_counter()
        self._start()
        ledger = RunLedger()
        ledger.record(
            "run_start",
            mode=f"baseline:{source.value}",
            query=query.text,
            search_time=query.search_time.isoformat() if query.search_time else None,
            config=self._artifact_config(),
        )
        interp = QueryInterpretation.identity(query, sources=(source,))
        state = SearchState(initial_query=query, interpretation=interp)
        state.enqueue([query.text])
        state.iteration = 1
        temporal = TemporalConstraint().with_cutoff(query.search_time)
        summary = await self._search_iteration(query, state, [source], temporal, ledger)
        state.set_cache(select_top_k(state.pool, len(state.pool)), len(state.pool))
        summary.pool_size = summary.cache_size = len(state.pool)
        ledger.record("stop", reason="baseline", iteration=1)
        return self._finish(
            query, interp, state, unchanged(state.paper_cache), [summary], "baseline", ledger, started
        )

    def _finish(
        self,
        query: UserQuery,
        interp: QueryInterpretation,
        state: SearchState,
        ranked: List[RankedPaper],
        iterations: List[IterationSummary],
        stop_reason: str,
        ledger: RunLedger,
        started: float,
    ) -> RunReport:
        warnings = self._drain_all_warnings()
        ledger.record("warnings", warnings=warnings)
        ledger.record("final", ranked=[entry.to_dict() for entry in ranked])
        report = RunReport(
            query=query,
            interpretation=interp,
            ranked=ranked,
            iterations=iterations,
            searched_queries=list(state.searched_queries),
            pool=state.pool,
            raw_records=list(self.retrieval.raw_records.values()),
            warnings=warnings,
            stop_reason=stop_reason,
            ledger=ledger,
            call_counts=self._call_counts(),
            elapsed_seconds=time.perf_counter() - started,
            rerank_fell_back=self.reranker.fell_back,
        )
        self.logger.info(
            f"Run finished ({stop_reason}) after {len(iterations)} iterations: "
            f"{len(ranked)} ranked, {report.valid_doc_num} related, {report.raw_doc_num} raw, "
            f"{report.elapsed_seconds:.2f}s, calls {report.call_counts}"
        )
        return report
