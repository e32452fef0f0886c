"""Exception hierarchy for the SPAR pipeline."""

from typing import Optional


class SparError(Exception):
    """Base class for every error raised by the package."""


class PreconditionError(SparError, ValueError):
    """An operation was called with arguments violating its precondition."""


# Configuration

class ConfigError(SparError):
    """Configuration could not be loaded."""


class ConfigParse(ConfigError):
    """The configuration file could not be read or parsed."""


class ConfigInvalid(ConfigError):
    """A configuration key holds an invalid value or is unknown."""

    def __init__(self, key: str, detail: str = ""):
        self.key = key
        self.detail = detail
        message = f"Invalid configuration value for '{key}'"
        if detail:
            message += f": {detail}"
        super().__init__(message)


# Prompt templates

class TemplateError(SparError):
    """Prompt template rendering failed."""


class UnknownTemplate(TemplateError):
    """No template is registered under the requested id."""


class MissingBinding(TemplateError):
    """A template placeholder had no binding."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Missing binding for placeholder '{name}'")


# LLM gateway

class GatewayError(SparError):
    """Chat-completion call failed."""


class LLMTransportError(GatewayError):
    """Connection or protocol failure talking to the chat endpoint."""


class LLMRateLimited(GatewayError):
    """The chat endpoint rejected the call for rate reasons."""

    def __init__(self, message: str = "Rate limited", retry_after: Optional[float] = None):
        self.retry_after = retry_after
        super().__init__(message)


class LLMTimeout(GatewayError):
    """The chat endpoint did not answer in time."""


class CassetteMiss(SparError):
    """Replay mode found no recorded response for a request fingerprint."""

    def __init__(self, fingerprint: str):
        self.fingerprint = fingerprint
        super().__init__(f"No recorded response for fingerprint {fingerprint}")


# Response parsing

class ParseError(SparError):
    """A model completion did not match the expected output format."""


class NoScoreFound(ParseError):
    pass


class ScoreOutOfRange(ParseError):
    pass


class NoArrayFound(ParseError):
    pass


class MalformedArray(ParseError):
    pass


class MarkersNotFound(ParseError):
    pass


class EmptyKeywordList(ParseError):
    pass


class NoLinesMatched(ParseError):
    pass


class DuplicateIndex(ParseError):
    pass


class IndexOutOfRange(ParseError):
    pass


class MissingField(ParseError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Missing field '{name}'")


class UnknownSource(ParseError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unknown source '{name}'")


class MalformedBoolean(ParseError):
    pass


class InterpretationParseError(ParseError):
    """The interpretation completion could not be turned into a QueryInterpretation."""


# Academic sources

class SourceError(SparError):
    """A source adapter call failed."""


class SourceTransportError(SourceError):
    pass


class SourceRateLimited(SourceError):
    def __init__(self, message: str = "Rate limited", retry_after: Optional[float] = None):
        self.retry_after = retry_after
        super().__init__(message)


class QuotaExceeded(SourceError):
    pass


class SourceParseError(SourceError):
    pass


class WrongSourceKind(SourceError, PreconditionError):
    """Keyword extraction was requested for a full-string source."""


# Benchmarks

class SchemaError(SparError):
    """A benchmark record does not match the expected schema."""

    def __init__(self, line: int, field: str, detail: str = ""):
        self.line = line
        self.field = field
        message = f"Line {line}: invalid field '{field}'"
        if detail:
            message += f" ({detail})"
        super().__init__(message)
