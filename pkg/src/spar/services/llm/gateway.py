"""Chat-completion gateway with record/replay cassettes."""

import asyncio
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Protocol, Tuple, Union

import openai
from openai import AsyncOpenAI
from tenacity import AsyncRetrying, retry_if_exception_type, stop_after_attempt, wait_exponential

from ...config.llm_config import LLMConfig
from ...config.settings import LLMMode
from ...errors import CassetteMiss, LLMRateLimited, LLMTimeout, LLMTransportError, PreconditionError
from ...utils.logging import get_logger
from .templates import PromptId, render

logger = get_logger(__name__)


@dataclass(frozen=True)
class ChatRequest:
    """A single-turn chat-completion request.

    ``template_id`` and ``bindings`` identify the request for cassette
    fingerprinting; ``attempt`` separates deliberate re-asks of the same prompt.
    """

    prompt: str
    temperature: float = 0.0
    max_tokens: int = 1024
    model: str = ""
    template_id: Optional[str] = None
    bindings: Tuple[Tuple[str, str], ...] = ()
    attempt: int = 0

    def __post_init__(self) -> None:
        if not self.prompt:
            raise PreconditionError("ChatRequest prompt must be nonempty")
        if self.temperature < 0:
            raise PreconditionError("temperature must be non-negative")
        if self.max_tokens <= 0:
            raise PreconditionError("max_tokens must be positive")
        if isinstance(self.bindings, Mapping):
            object.__setattr__(self, "bindings", tuple(sorted((k, str(v)) for k, v in self.bindings.items())))

    def fingerprint(self) -> str:
        """Stable hash of template id, sorted bindings and decoding parameters."""
        payload: Dict[str, Any] = {
            "model": self.model,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        if self.template_id is not None:
            payload["template"] = self.template_id
            payload["bindings"] = [list(pair) for pair in sorted(self.bindings)]
        else:
            payload["prompt"] = self.prompt
        if self.attempt:
            payload["attempt"] = self.attempt
        encoded = json.dumps(payload, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(encoded.encode("utf-8")).hexdigest()


class Cassette:
    """Fingerprint to response map persisted as one JSON file per suite."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._lock = asyncio.Lock()
        self.entries: Dict[str, str] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as f:
                self.entries = json.load(f)

    @classmethod
    def for_suite(cls, directory: Union[str, Path], suite: str = "default") -> "Cassette":
        return cls(Path(directory) / f"{suite}.json")

    def get(self, fingerprint: str) -> Optional[str]:
        return self.entries.get(fingerprint)

    def __len__(self) -> int:
        return len(self.entries)

    async def put(self, fingerprint: str, text: str) -> None:
        async with self._lock:
            self.entries[fingerprint] = text
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "w", encoding="utf-8") as f:
                json.dump(self.entries, f, sort_keys=True, indent=2, ensure_ascii=False)
                f.write("\n")


class ChatTransport(Protocol):
    async def send(self, request: ChatRequest) -> str:
        ...


class OpenAIChatTransport:
    """Transport for any OpenAI-compatible chat-completions endpoint."""

    def __init__(self, api_key: Optional[str] = None, base_url: Optional[str] = None, timeout: Optional[float] = None):
        self.client = AsyncOpenAI(
            api_key=api_key or "EMPTY",
            base_url=base_url,
            timeout=timeout or LLMConfig.get_timeout(),
            max_retries=0,
        )

    async def send(self, request: ChatRequest) -> str:
        try:
            response = await self.client.chat.completions.create(
                model=request.model,
                messages=[{"role": "user", "content": request.prompt}],
                temperature=request.temperature,
                max_tokens=request.max_tokens,
            )
        except openai.RateLimitError as e:
            retry_after = e.response.headers.get("retry-after") if e.response is not None else None
            raise LLMRateLimited(str(e), float(retry_after) if retry_after else None) from e
        except openai.APITimeoutError as e:
            raise LLMTimeout(str(e)) from e
        except (openai.APIConnectionError, openai.APIStatusError) as e:
            raise LLMTransportError(str(e)) from e
        return response.choices[0].message.content or ""


class LLMGateway:
    """Single entry point for chat completions in live, record or replay mode."""

    def __init__(
        self,
        transport: Optional[ChatTransport] = None,
        mode: LLMMode = LLMMode.LIVE,
        cassette: Optional[Cassette] = None,
        model: str = "",
        max_concurrent: int = 8,
        retry_wait: Any = None,
    ):
        if mode is not LLMMode.LIVE and cassette is None:
            raise PreconditionError(f"{mode.value} mode requires a cassette")
        if mode is not LLMMode.REPLAY and transport is None:
            raise PreconditionError(f"{mode.value} mode requires a transport")
        self.transport = transport
        self.mode = mode
        self.cassette = cassette
        self.model = model
        self.retry_wait = retry_wait or wait_exponential(multiplier=1, min=1, max=10)
        self._semaphore = asyncio.Semaphore(max_concurrent)
        self.stats = {"transport_calls": 0, "replayed": 0, "recorded": 0}

    async def complete(self, request: ChatRequest, mode: Optional[LLMMode] = None) -> str:
        """
        Return the completion text for a request.

        Raises:
            CassetteMiss: replay mode and the fingerprint was never recorded
            LLMTransportError, LLMRateLimited, LLMTimeout: live call failed
        """
        mode = mode or self.mode
        fingerprint = request.fingerprint()

        if mode is LLMMode.REPLAY:
            text = self.cassette.get(fingerprint)
            if text is None:
                raise CassetteMiss(fingerprint)
            self.stats["replayed"] += 1
            return text

        text = await self._send(request)
        if mode is LLMMode.RECORD:
            await self.cassette.put(fingerprint, text)
            self.stats["recorded"] += 1
        return text

    async def _send(self, request: ChatRequest) -> str:
        async with self._semaphore:
            async for attempt in AsyncRetrying(
                stop=stop_after_attempt(2),
                wait=self.retry_wait,
                retry=retry_if_exception_type((LLMTransportError, LLMTimeout)),
                reraise=True,
            ):
                with attempt:
                    self.stats["transport_calls"] += 1
                    text = await self.transport.send(request)
            return text

    async def ask(
        self,
        template_id: PromptId,
        bindings: Mapping[str, Any],
        stage: str,
        attempt: int = 0,
        model: Optional[str] = None,
    ) -> str:
        """Render a template and complete it with the stage's decoding parameters."""
        prompt = render(template_id, bindings)
        decoding = LLMConfig.get_config(stage)
        request = ChatRequest(
            prompt=prompt,
            temperature=decoding["temperature"],
            max_tokens=decoding["max_tokens"],
            model=model or self.model,
            template_id=template_id.value,
            bindings={k: "" if v is None else str(v) for k, v in bindings.items()},
            attempt=attempt,
        )
        logger.debug(f"LLM request {template_id.value} attempt={attempt} fp={request.fingerprint()[:12]}")
        return await self.complete(request)
