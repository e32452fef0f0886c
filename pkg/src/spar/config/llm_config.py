"""Decoding settings for each chat-completion stage."""

import os
from typing import Any, Dict, Mapping, Optional


class LLMConfig:
    """Per-stage decoding parameters for the chat endpoint."""

    DEFAULT_MAX_TOKENS = 1024
    DEFAULT_TIMEOUT = 60.0

    STAGE_DEFAULTS = {
        "interpretation": {"temperature": 0.0, "max_tokens": 1024},
        "refinement": {"temperature": 0.0, "max_tokens": 256},
        "keywords": {"temperature": 0.0, "max_tokens": 256},
        "judgement": {"temperature": 0.0, "max_tokens": 512},
        "evolution": {"temperature": 0.7, "max_tokens": 512},
        "rerank": {"temperature": 0.0, "max_tokens": 1024},
    }

    @classmethod
    def get_config(cls, stage: str, env: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
        """Get decoding parameters for a pipeline stage.

        ``SPAR_LLM_MAX_TOKENS`` overrides the token budget of every stage.

        Raises:
            ValueError: unknown stage
        """
        if stage not in cls.STAGE_DEFAULTS:
            raise ValueError(f"Unsupported LLM stage: {stage}")
        env = os.environ if env is None else env

        config = cls.STAGE_DEFAULTS[stage].copy()
        if env.get("SPAR_LLM_MAX_TOKENS"):
            config["max_tokens"] = int(env["SPAR_LLM_MAX_TOKENS"])
        return config

    @classmethod
    def get_timeout(cls, env: Optional[Mapping[str, str]] = None) -> float:
        env = os.environ if env is None else env
        return float(env.get("SPAR_LLM_TIMEOUT", cls.DEFAULT_TIMEOUT))
