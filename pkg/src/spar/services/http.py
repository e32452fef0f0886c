"""Rate-limited, cached HTTP access for source adapters."""

import asyncio
from typing import Any, Dict, Mapping, Optional

import httpx
from tenacity import AsyncRetrying, retry_if_exception_type, stop_after_attempt, wait_exponential

from ..errors import QuotaExceeded, SourceParseError, SourceRateLimited, SourceTransportError
from ..utils.logging import get_logger
from .cache import DiskCache
from .rate_limit import RateLimiter

logger = get_logger(__name__)

USER_AGENT = "spar/0.1 (scholarly retrieval)"


class SourceHttpClient:
    """GET-only client shared by the adapters of one source.

    Secret parameters and headers are sent but kept out of cache keys.
    """

    def __init__(
        self,
        name: str,
        client: httpx.AsyncClient,
        limiter: Optional[RateLimiter] = None,
        cache: Optional[DiskCache] = None,
        max_concurrent: int = 2,
        secret_params: Optional[Mapping[str, str]] = None,
        secret_headers: Optional[Mapping[str, str]] = None,
        retry_wait: Any = None,
    ):
        self.name = name
        self.client = client
        self.limiter = limiter
        self.cache = cache
        self.secret_params = dict(secret_params or {})
        self.secret_headers = dict(secret_headers or {})
        self.retry_wait = retry_wait or wait_exponential(multiplier=1, min=1, max=10)
        self._semaphore = asyncio.Semaphore(max_concurrent)
        self.stats = {"requests": 0, "cache_hits": 0}

    @staticmethod
    def cache_key(url: str, params: Optional[Mapping[str, Any]] = None) -> str:
        """Full request URL with sorted parameters."""
        items = sorted((k, str(v)) for k, v in (params or {}).items() if v is not None)
        return str(httpx.URL(url, params=items))

    async def get_json(self, url: str, params: Optional[Mapping[str, Any]] = None) -> Optional[Any]:
        """GET a JSON document. Returns None on 404."""
        return await self._get(url, params, as_json=True)

    async def get_text(self, url: str, params: Optional[Mapping[str, Any]] = None) -> Optional[str]:
        """GET a text document (XML feeds). Returns None on 404."""
        payload = await self._get(url, params, as_json=False)
        return None if payload is None else payload["text"]

    async def _get(self, url: str, params: Optional[Mapping[str, Any]], as_json: bool) -> Optional[Any]:
        key = ("json:" if as_json else "text:") + self.cache_key(url, params)
        if self.cache is not None:
            cached = await self.cache.get(key)
            if cached is not None:
                self.stats["cache_hits"] += 1
                return cached.get("value")

        async for attempt in AsyncRetrying(
            stop=stop_after_attempt(2),
            wait=self.retry_wait,
            retry=retry_if_exception_type(SourceTransportError),
            reraise=True,
        ):
            with attempt:
                response = await self._request(url, params)

        if response.status_code == 404:
            value = None
        elif as_json:
            try:
                value = response.json()
            except ValueError as e:
                raise SourceParseError(f"{self.name}: response is not JSON") from e
        else:
            value = {"text": response.text}

        if self.cache is not None:
            await self.cache.set(key, {"value": value})
        return value

    async def _request(self, url: str, params: Optional[Mapping[str, Any]]) -> httpx.Response:
        query: Dict[str, Any] = {k: v for k, v in (params or {}).items() if v is not None}
        query.update(self.secret_params)
        headers = {"User-Agent": USER_AGENT, **self.secret_headers}
        async with self._semaphore:
            if self.limiter is not None:
                await self.limiter.acquire()
            self.stats["requests"] += 1
            try:
                response = await self.client.get(url, params=query, headers=headers)
            except httpx.TimeoutException as e:
                raise SourceTransportError(f"{self.name}: request timed out") from e
            except httpx.HTTPError as e:
                raise SourceTransportError(f"{self.name}: {type(e).__name__}") from e

        status = response.status_code
        if status == 429:
            retry_after = response.headers.get("retry-after")
            raise SourceRateLimited(
                f"{self.name}: rate limited",
                float(retry_after) if retry_after and retry_after.isdigit() else None,
            )
        if status == 402:
            raise QuotaExceeded(f"{self.name}: quota exceeded")
        if status >= 500:
            raise SourceTransportError(f"{self.name}: server error {status}")
        if status >= 400 and status != 404:
            raise SourceTransportError(f"{self.name}: HTTP {status}")
        return response

    async def aclose(self) -> None:
        await self.client.aclose()
