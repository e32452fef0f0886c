"""Wires configuration, services and agents into a ready orchestrator."""

from pathlib import Path
from typing import Dict, Optional

import httpx

from ..agents.judgement import JudgementAgent
from ..agents.orchestrator import Orchestrator
from ..agents.query_evolver import QueryEvolverAgent
from ..agents.query_understanding import QueryUnderstandingAgent
from ..agents.refchain import RefChainAgent
from ..agents.reranker import RerankerAgent
from ..agents.retrieval import RetrievalAgent
from ..config.llm_config import LLMConfig
from ..config.settings import LLMMode, RunConfig, Settings
from ..errors import PreconditionError
from ..models.paper import SourceKind
from ..utils.logging import get_logger
from .cache import DiskCache
from .http import USER_AGENT, SourceHttpClient
from .llm.gateway import Cassette, ChatTransport, LLMGateway, OpenAIChatTransport
from .rate_limit import RateLimiter
from .sources.arxiv import ArxivAdapter
from .sources.base import SourceAdapter
from .sources.openalex import OpenAlexAdapter
from .sources.pubmed import PubMedAdapter
from .sources.semantic_scholar import SemanticScholarAdapter
from .sources.web import WebSearchAdapter, WebSearchProvider

logger = get_logger(__name__)

HTTP_TIMEOUT = 30.0
CASSETTE_SUITE = "default"


class Pipeline:
    """An orchestrator together with the resources it owns."""

    def __init__(
        self,
        orchestrator: Orchestrator,
        gateway: LLMGateway,
        http_clients: Dict[SourceKind, SourceHttpClient],
        client: Optional[httpx.AsyncClient] = None,
        cache: Optional[DiskCache] = None,
    ):
        self.orchestrator = orchestrator
        self.gateway = gateway
        self.http_clients = http_clients
        self.client = client
        self.cache = cache

    async def aclose(self) -> None:
        if self.client is not None:
            await self.client.aclose()

    async def __aenter__(self) -> "Pipeline":
        return self

    async def __aexit__(self, *exc) -> None:
        await self.aclose()


def build_gateway(
    config: RunConfig, settings: Settings, transport: Optional[ChatTransport] = None
) -> LLMGateway:
    """
    Gateway for the configured LLM mode.

    Raises:
        PreconditionError: record or replay without a cassette directory
        ConfigInvalid: live or record without credentials or endpoint
    """
    cassette = None
    if config.llm_mode is not LLMMode.LIVE:
        if not config.cassette_dir:
            raise PreconditionError(f"{config.llm_mode.value} mode needs a cassette directory")
        cassette = Cassette.for_suite(config.cassette_dir, CASSETTE_SUITE)
    if config.llm_mode is not LLMMode.REPLAY and transport is None:
        settings.validate_for(config.llm_mode)
        transport = OpenAIChatTransport(
            api_key=settings.llm_api_key.get_secret_value() if settings.llm_api_key else None,
            base_url=settings.llm_base_url,
            timeout=LLMConfig.get_timeout(),
        )
    return LLMGateway(
        transport=transport,
        mode=config.llm_mode,
        cassette=cassette,
        model=config.llm_model,
        max_concurrent=config.max_concurrent_llm,
    )


def build_adapters(
    config: RunConfig,
    settings: Settings,
    client: httpx.AsyncClient,
    cache: Optional[DiskCache] = None,
    web_provider: Optional[WebSearchProvider] = None,
) -> Dict[SourceKind, SourceAdapter]:
    """One adapter per source, each with its own rate limiter and concurrency ceiling."""

    def http(kind: SourceKind, **secrets) -> SourceHttpClient:
        return SourceHttpClient(
            name=kind.value,
            client=client,
            limiter=RateLimiter(config.requests_per_minute, period=60.0),
            cache=cache,
            max_concurrent=config.max_concurrent_per_source,
            **secrets,
        )

    s2_headers = {"x-api-key": settings.s2_api_key.get_secret_value()} if settings.s2_api_key else None
    ncbi_params = {"api_key": settings.ncbi_api_key.get_secret_value()} if settings.ncbi_api_key else None
    return {
        SourceKind.ARXIV: ArxivAdapter(http(SourceKind.ARXIV)),
        SourceKind.OPENALEX: OpenAlexAdapter(http(SourceKind.OPENALEX), mailto=settings.openalex_mailto),
        SourceKind.SEMANTIC_SCHOLAR: SemanticScholarAdapter(
            http(SourceKind.SEMANTIC_SCHOLAR, secret_headers=s2_headers)
        ),
        SourceKind.PUBMED: PubMedAdapter(http(SourceKind.PUBMED, secret_params=ncbi_params)),
        SourceKind.GOOGLE: WebSearchAdapter(web_provider),
    }


def assemble(
    config: RunConfig, gateway: LLMGateway, adapters: Dict[SourceKind, SourceAdapter]
) -> Orchestrator:
    """Create the agents around a gateway and a set of adapters."""
    retrieval = RetrievalAgent(gateway, adapters, config)
    judgement = JudgementAgent(gateway, config)
    return Orchestrator(
        gateway=gateway,
        understanding=QueryUnderstandingAgent(gateway, config),
        retrieval=retrieval,
        judgement=judgement,
        refchain=RefChainAgent(retrieval, judgement, config),
        evolver=QueryEvolverAgent(gateway, config),
        reranker=RerankerAgent(gateway, config),
        config=config,
    )


def build_pipeline(
    config: RunConfig,
    settings: Settings,
    transport: Optional[ChatTransport] = None,
    web_provider: Optional[WebSearchProvider] = None,
    http_transport: Optional[httpx.AsyncBaseTransport] = None,
) -> Pipeline:
    """Build everything a CLI or evaluation run needs from configuration and settings."""
    gateway = build_gateway(config, settings, transport)
    cache = DiskCache(Path(settings.http_cache_dir), enabled=config.http_cache_enabled)
    client = httpx.AsyncClient(
        timeout=HTTP_TIMEOUT,
        headers={"User-Agent": USER_AGENT},
        follow_redirects=True,
        transport=http_transport,
    )
    adapters = build_adapters(config, settings, client, cache, web_provider)
    orchestrator = assemble(config, gateway, adapters)
    http_clients = {kind: adapter.http for kind, adapter in adapters.items() if adapter.http is not None}
    logger.info(
        f"Pipeline ready: mode {config.llm_mode.value}, model {config.llm_model}, "
        f"toggles {config.toggles.label()}, HTTP cache {'on' if cache.enabled else 'off'}"
    )
    return Pipeline(orchestrator, gateway, http_clients, client=client, cache=cache)
