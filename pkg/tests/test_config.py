"""Tests for configuration loading and settings."""

import pytest

from spar.config.llm_config import LLMConfig
from spar.config.settings import LLMMode, RunConfig, Settings, Toggles, load_config
from spar.errors import ConfigInvalid, ConfigParse
from spar.models.paper import JudgeVariant, SourceKind


@pytest.fixture
def config_file(tmp_path):
    def write(text):
        path = tmp_path / "spar.conf"
        path.write_text(text, encoding="utf-8")
        return path

    return write


def test_config_loads_defaults():
    """No file, no environment and no flags give the documented defaults."""
    config = load_config()

    assert config.cache_target == 50
    assert config.max_iterations == 3
    assert config.threshold == 0.5
    assert config.threshold_inclusive is False
    assert config.subset_size == 5
    assert config.judge_variant is JudgeVariant.BRIEF
    assert config.llm_mode is LLMMode.LIVE
    assert config.toggles == Toggles()
    assert config.recall_at_k == (5, 10)


def test_flags_override_file(config_file):
    """A flag beats the file value for the same key."""
    path = config_file("k=20\nthreshold=0.6\n")

    config = load_config(path, flags={"cache_target": 10})

    assert config.cache_target == 10
    assert config.threshold == 0.6


def test_environment_between_file_and_flags(config_file):
    """Environment values override the file and lose to flags."""
    path = config_file("SPAR_K=20\nmax_iterations=2\n")
    env = {"SPAR_K": "30", "SPAR_MAX_ITERATIONS": "4", "HOME": "/root"}

    assert load_config(path, env=env).cache_target == 30
    config = load_config(path, env=env, flags={"max_iterations": 5})
    assert config.max_iterations == 5


def test_environment_ignores_unknown_and_secret_keys():
    """Non-configuration SPAR_ variables, including secrets, are not run configuration."""
    env = {"SPAR_LLM_API_KEY": "sk-secret", "SPAR_LLM_MAX_TOKENS": "64", "SPAR_SEED": "7"}

    config = load_config(env=env)

    assert config.seed == 7


def test_threshold_out_of_range_names_key():
    """Validation failures report the offending key."""
    with pytest.raises(ConfigInvalid) as exc_info:
        load_config(flags={"threshold": 1.5})

    assert exc_info.value.key == "threshold"


def test_unknown_file_key_rejected(config_file):
    with pytest.raises(ConfigInvalid) as exc_info:
        load_config(config_file("cache_size=10\n"))

    assert exc_info.value.key == "cache_size"


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ConfigParse):
        load_config(tmp_path / "absent.conf")


def test_ablation_toggles(config_file):
    """ablate_<name>=on|off switches stages from files, environment and flags."""
    path = config_file("ablate_rerank=off\n")

    config = load_config(
        path,
        env={"SPAR_ABLATE_REFCHAIN": "off"},
        flags={"ablate_evolution": "off", "ablate_rerank": "on"},
    )

    assert config.toggles == Toggles(qinterp=True, refchain=False, evolution=False, rerank=True)
    assert config.toggles.label() == "qinterp=on,refchain=off,evolution=off,rerank=on"


def test_invalid_ablation(config_file):
    """Unknown toggle names and values that are not booleans are rejected."""
    with pytest.raises(ConfigInvalid) as exc_info:
        load_config(flags={"ablate_judging": "off"})
    assert exc_info.value.key == "ablate_judging"

    with pytest.raises(ConfigInvalid) as exc_info:
        load_config(config_file("ablate_rerank=maybe\n"))
    assert exc_info.value.key == "ablate_rerank"


def test_sources_and_ks_from_strings():
    config = load_config(flags={"sources": "pubmed, Semantic Scholar", "recall_at_k": "1,5,20"})

    assert config.sources == (SourceKind.PUBMED, SourceKind.SEMANTIC_SCHOLAR)
    assert config.recall_at_k == (1, 5, 20)


def test_source_limit_within_page_cap():
    with pytest.raises(ConfigInvalid) as exc_info:
        load_config(flags={"source_page_cap": 10, "source_limit": 20})

    assert exc_info.value.key == "source_limit"


def test_enum_values_case_insensitive():
    config = load_config(flags={"judge_variant": "Complex", "llm_mode": "REPLAY", "cassette_dir": "c"})

    assert config.judge_variant is JudgeVariant.COMPLEX
    assert config.llm_mode is LLMMode.REPLAY


def test_with_toggles_and_echo():
    """Toggle overrides copy the config; the echo is JSON-ready."""
    config = RunConfig(sources=(SourceKind.ARXIV,))
    changed = config.with_toggles(rerank=False)

    assert config.toggles.rerank is True
    assert changed.toggles.rerank is False
    echo = changed.echo()
    assert echo["toggles"]["rerank"] is False
    assert echo["sources"] == ["ArXiv"]
    assert echo["judge_variant"] == "brief"


def test_settings_from_env():
    """Secrets load as SecretStr and are listed for masking."""
    settings = Settings.load_from_env({
        "SPAR_LLM_API_KEY": "sk-test",
        "SPAR_S2_API_KEY": "s2-test",
        "SPAR_OPENALEX_MAILTO": "me@example.org",
        "SPAR_HTTP_CACHE_DIR": "/tmp/spar-http",
        "SPAR_LOG_LEVEL": "DEBUG",
    })

    assert settings.llm_api_key.get_secret_value() == "sk-test"
    assert "sk-test" not in repr(settings)
    assert sorted(settings.secret_values()) == ["s2-test", "sk-test"]
    assert settings.openalex_mailto == "me@example.org"
    assert settings.http_cache_dir == "/tmp/spar-http"
    assert settings.log_level == "DEBUG"
    assert settings.ncbi_api_key is None


def test_settings_validation_for_mode():
    """Live and record runs need credentials or an endpoint; replay needs neither."""
    settings = Settings.load_from_env({})

    with pytest.raises(ConfigInvalid) as exc_info:
        settings.validate_for(LLMMode.LIVE)
    assert exc_info.value.key == "SPAR_LLM_API_KEY"
    settings.validate_for(LLMMode.REPLAY)
    Settings.load_from_env({"SPAR_LLM_BASE_URL": "http://localhost:8000/v1"}).validate_for(LLMMode.RECORD)


def test_llm_stage_config():
    assert LLMConfig.get_config("judgement", env={}) == {"temperature": 0.0, "max_tokens": 512}
    assert LLMConfig.get_config("evolution", env={"SPAR_LLM_MAX_TOKENS": "64"})["max_tokens"] == 64
    assert LLMConfig.get_timeout(env={"SPAR_LLM_TIMEOUT": "5"}) == 5.0
    with pytest.raises(ValueError):
        LLMConfig.get_config("planning", env={})
