from .llm_config import LLMConfig
from .settings import LLMMode, RunConfig, Settings, Toggles, load_config

__all__ = ["LLMConfig", "LLMMode", "RunConfig", "Settings", "Toggles", "load_config"]
