"""Sliding-window rate limiter for source APIs."""

import asyncio
import time
from collections import deque
from typing import Awaitable, Callable, Deque, Optional

from ..utils.logging import get_logger

logger = get_logger(__name__)


class RateLimiter:
    """Allows at most ``max_calls`` acquisitions in any ``period``-second window.

    The clock and sleep functions are injectable so tests can drive time.
    """

    def __init__(
        self,
        max_calls: int,
        period: float = 60.0,
        clock: Callable[[], float] = time.monotonic,
        sleep: Optional[Callable[[float], Awaitable[None]]] = None,
    ):
        if max_calls < 1:
            raise ValueError("max_calls must be at least 1")
        self.max_calls = max_calls
        self.period = period
        self.clock = clock
        self.sleep = sleep or asyncio.sleep
        self.calls: Deque[float] = deque()
        self._lock = asyncio.Lock()

    async def acquire(self) -> None:
        """Wait until another call fits in the window, then record it."""
        async with self._lock:
            while True:
                now = self.clock()
                while self.calls and now - self.calls[0] >= self.period:
                    self.calls.popleft()
                if len(self.calls) < self.max_calls:
                    break
                wait_time = self.period - (now - self.calls[0])
                logger.debug(f"Rate limit reached, waiting {wait_time:.2f}s")
                await self.sleep(wait_time)
            self.calls.append(self.clock())

    def in_window(self) -> int:
        now = self.clock()
        return sum(1 for t in self.calls if now - t < self.period)
