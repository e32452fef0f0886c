"""Configuration settings for SPAR runs.

Two layers live here. ``RunConfig`` holds every tunable of a retrieval run
and is assembled by ``load_config`` from defaults, a key=value file, the
environment and command-line flags. ``Settings`` carries endpoints and API
keys, which only ever come from the environment.
"""

import enum
import os
from pathlib import Path
from typing import Any, ClassVar, Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, SecretStr, ValidationError, ValidationInfo, field_validator

from ..errors import ConfigInvalid, ConfigParse
from ..models.paper import JudgeVariant, SourceKind
from ..utils.logging import get_logger

logger = get_logger(__name__)

ENV_PREFIX = "SPAR_"
ABLATE_PREFIX = "ablate_"
DEFAULT_MODEL = "Qwen/Qwen3-32B"


class LLMMode(enum.Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"


class Toggles(BaseModel):
    """Ablation switches, one per optional pipeline stage."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    qinterp: bool = True
    refchain: bool = True
    evolution: bool = True
    rerank: bool = True

    @classmethod
    def names(cls) -> List[str]:
        return list(cls.model_fields)

    def label(self) -> str:
        return ",".join(f"{name}={'on' if getattr(self, name) else 'off'}" for name in self.names())


class RunConfig(BaseModel):
    """Every tunable of a single retrieval run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    cache_target: int = Field(default=50, ge=1)
    max_iterations: int = Field(default=3, ge=1)
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    threshold_inclusive: bool = False
    subset_size: int = Field(default=5, ge=1)
    seed: int = 0

    source_page_cap: int = Field(default=100, ge=1)
    source_limit: int = Field(default=20, ge=1)
    sources: Tuple[SourceKind, ...] = ()
    requests_per_minute: int = Field(default=60, ge=1)
    max_concurrent_per_source: int = Field(default=2, ge=1)
    http_cache_enabled: bool = True
    refine_web_queries: bool = False

    toggles: Toggles = Field(default_factory=Toggles)

    judge_variant: JudgeVariant = JudgeVariant.BRIEF
    judge_model: str = DEFAULT_MODEL
    llm_model: str = DEFAULT_MODEL
    llm_mode: LLMMode = LLMMode.LIVE
    cassette_dir: Optional[str] = None
    max_concurrent_llm: int = Field(default=8, ge=1)

    max_refinements: int = Field(default=8, ge=1)
    refchain_fanout: int = Field(default=50, ge=1)
    evolution_n: int = Field(default=3, ge=1)
    evolution_paper_cap: int = Field(default=10, ge=1)
    jaccard_threshold: float = Field(default=0.8, ge=0.0, le=1.0)
    rerank_window: int = Field(default=10, ge=1)
    recall_at_k: Tuple[int, ...] = (5, 10)

    @field_validator("sources", mode="before")
    @classmethod
    def _parse_sources(cls, value: Any) -> Any:
        if isinstance(value, str):
            value = [part for part in value.split(",") if part.strip()]
        if isinstance(value, (list, tuple)):
            return tuple(v if isinstance(v, SourceKind) else SourceKind.parse(str(v)) for v in value)
        return value

    @field_validator("recall_at_k", mode="before")
    @classmethod
    def _parse_ks(cls, value: Any) -> Any:
        if isinstance(value, str):
            return tuple(int(part) for part in value.split(",") if part.strip())
        return value

    @field_validator("recall_at_k")
    @classmethod
    def _positive_ks(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(k < 1 for k in value):
            raise ValueError("recall@k cutoffs must be positive")
        return value

    @field_validator("judge_variant", "llm_mode", mode="before")
    @classmethod
    def _lowercase_enum(cls, value: Any) -> Any:
        return value.strip().lower() if isinstance(value, str) else value

    @field_validator("source_limit")
    @classmethod
    def _limit_within_cap(cls, value: int, info: ValidationInfo) -> int:
        cap = info.data.get("source_page_cap")
        if cap is not None and value > cap:
            raise ValueError(f"source_limit exceeds the page cap of {cap}")
        return value

    def with_toggles(self, **changes: bool) -> "RunConfig":
        return self.model_copy(update={"toggles": self.toggles.model_copy(update=changes)})

    def echo(self) -> Dict[str, Any]:
        """JSON-ready view of the configuration."""
        return self.model_dump(mode="json")


KEY_ALIASES = {
    "k": "cache_target",
    "iterations": "max_iterations",
    "source": "sources",
}


def _canonical_key(raw: str) -> str:
    key = raw.strip()
    if key.upper().startswith(ENV_PREFIX):
        key = key[len(ENV_PREFIX):]
    key = key.lower().replace("-", "_")
    return KEY_ALIASES.get(key, key)


def _apply_layer(merged: Dict[str, Any], layer: Mapping[str, Any], strict: bool) -> None:
    toggles = merged.setdefault("toggles", {})
    for raw_key, value in layer.items():
        if value is None:
            continue
        key = _canonical_key(raw_key)
        if key.startswith(ABLATE_PREFIX):
            name = key[len(ABLATE_PREFIX):]
            if name not in Toggles.model_fields:
                raise ConfigInvalid(key, f"unknown ablation toggle '{name}'")
            toggles[name] = value
        elif key in RunConfig.model_fields and key != "toggles":
            merged[key] = value
        elif strict:
            raise ConfigInvalid(key, "unknown configuration key")
        else:
            logger.debug(f"Ignoring environment variable {raw_key}")


def load_config(
    path: Optional[Union[str, Path]] = None,
    env: Optional[Mapping[str, str]] = None,
    flags: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Build a RunConfig from layered sources.

    Precedence is flags > environment > file > defaults.

    Args:
        path: Optional key=value configuration file
        env: Environment mapping; only ``SPAR_``-prefixed variables are read
        flags: Already-parsed command-line values

    Raises:
        ConfigParse: the file is missing or unreadable
        ConfigInvalid: a key is unknown or its value fails validation
    """
    merged: Dict[str, Any] = {}

    if path is not None:
        file_path = Path(path)
        if not file_path.is_file():
            raise ConfigParse(f"Configuration file not found: {file_path}")
        try:
            file_values = dotenv_values(file_path)
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigParse(f"Could not read configuration file {file_path}: {e}") from e
        _apply_layer(merged, file_values, strict=True)

    if env:
        env_values = {
            k: v for k, v in env.items()
            if k.upper().startswith(ENV_PREFIX) and k.upper() not in Settings.ENV_KEYS
        }
        _apply_layer(merged, env_values, strict=False)

    if flags:
        _apply_layer(merged, flags, strict=True)

    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        error = e.errors()[0]
        loc = [str(part) for part in error.get("loc", ())]
        if loc and loc[0] == "toggles" and len(loc) > 1:
            key = ABLATE_PREFIX + loc[1]
        else:
            key = loc[0] if loc else "config"
        raise ConfigInvalid(key, error.get("msg", "")) from e


class Settings(BaseModel):
    """Endpoints and credentials, loaded from the environment only."""

    model_config = ConfigDict(frozen=True)

    ENV_KEYS: ClassVar[FrozenSet[str]] = frozenset({
        "SPAR_LLM_API_KEY",
        "SPAR_LLM_BASE_URL",
        "SPAR_S2_API_KEY",
        "SPAR_NCBI_API_KEY",
        "SPAR_OPENALEX_MAILTO",
        "SPAR_HTTP_CACHE_DIR",
        "SPAR_LOG_LEVEL",
        "SPAR_LOG_FILE",
    })

    llm_api_key: Optional[SecretStr] = None
    llm_base_url: Optional[str] = None
    s2_api_key: Optional[SecretStr] = None
    ncbi_api_key: Optional[SecretStr] = None
    openalex_mailto: Optional[str] = None
    http_cache_dir: str = str(Path.home() / ".cache" / "spar" / "http")
    log_level: str = "WARNING"
    log_file: Optional[str] = None

    @classmethod
    def load_from_env(cls, env: Optional[Mapping[str, str]] = None) -> "Settings":
        """Load settings from environment variables, reading a .env file first."""
        if env is None:
            load_dotenv()
            env = os.environ

        def secret(name: str) -> Optional[SecretStr]:
            value = env.get(name)
            return SecretStr(value) if value else None

        values: Dict[str, Any] = {
            "llm_api_key": secret("SPAR_LLM_API_KEY"),
            "llm_base_url": env.get("SPAR_LLM_BASE_URL") or None,
            "s2_api_key": secret("SPAR_S2_API_KEY"),
            "ncbi_api_key": secret("SPAR_NCBI_API_KEY"),
            "openalex_mailto": env.get("SPAR_OPENALEX_MAILTO") or None,
            "log_file": env.get("SPAR_LOG_FILE") or None,
        }
        if env.get("SPAR_HTTP_CACHE_DIR"):
            values["http_cache_dir"] = env["SPAR_HTTP_CACHE_DIR"]
        if env.get("SPAR_LOG_LEVEL"):
            values["log_level"] = env["SPAR_LOG_LEVEL"]
        return cls(**values)

    def secret_values(self) -> List[str]:
        """Plain-text secrets, for masking logs and scanning artifacts."""
        secrets = [self.llm_api_key, self.s2_api_key, self.ncbi_api_key]
        return [s.get_secret_value() for s in secrets if s is not None]

    def validate_for(self, mode: LLMMode) -> None:
        """Validate that the settings can serve a run in the given mode."""
        if mode is not LLMMode.REPLAY and not self.llm_api_key and not self.llm_base_url:
            raise ConfigInvalid(
                "SPAR_LLM_API_KEY",
                "a key or SPAR_LLM_BASE_URL is required outside replay mode",
            )
