"""Base agent implementation."""

from typing import Any, Dict, List, Optional

from ..config.settings import RunConfig
from ..utils.logging import get_logger


class BaseAgent:
    """Base class for all agents in the pipeline."""

    def __init__(self, name: str, config: Optional[RunConfig] = None):
        """Initialize the base agent.

        Args:
            name: The name of the agent
            config: Run configuration; defaults apply when omitted
        """
        self.name = name
        self.config = config or RunConfig()
        self.logger = get_logger(f"agent.{name.lower()}")

        self.state: Dict[str, Any] = {}
        self.warnings: List[str] = []

    def warn(self, message: str) -> None:
        """Record a non-fatal problem for the run report."""
        self.warnings.append(f"{self.name}: {message}")
        self.logger.warning(message)

    def drain_warnings(self) -> List[str]:
        """Return recorded warnings, sorted, and forget them."""
        drained = sorted(self.warnings)
        self.warnings.clear()
        return drained

    def get_state(self) -> Dict[str, Any]:
        """Get the current agent state."""
        return self.state.copy()

    def update_state(self, updates: Dict[str, Any]) -> None:
        self.state.update(updates)
        self.logger.debug(f"Updated state: {updates}")
