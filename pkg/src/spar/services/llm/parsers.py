"""Parsers for every completion format the pipeline's prompts request."""

import json
import re
from dataclasses import dataclass
from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple

from ...errors import (
    DuplicateIndex,
    EmptyKeywordList,
    IndexOutOfRange,
    MalformedArray,
    MalformedBoolean,
    MarkersNotFound,
    MissingField,
    NoArrayFound,
    NoLinesMatched,
    NoScoreFound,
    ScoreOutOfRange,
    UnknownSource,
)
from ...models.paper import SourceKind
from ...models.query import QueryIntent, QueryInterpretation, TemporalConstraint
from ...utils.logging import get_logger

logger = get_logger(__name__)

SCORE_SLACK = 0.005

_NUMBER = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)"
_SCORE_LINE = re.compile(r"^\W*score\W*:\W*?(" + _NUMBER + r")", re.IGNORECASE | re.MULTILINE)
_REASONING_LINE = re.compile(r"^\W*reasoning\W*?:[*_ \t]*", re.IGNORECASE | re.MULTILINE)
_FIELD_LINE = re.compile(r"^\W*(score|reasoning)\W*:", re.IGNORECASE | re.MULTILINE)
_RERANK_LINE = re.compile(
    r"^[^\w\n]*document[ \t]*\[?(\d+)\]?[ \t]*:[ \t]*\[?(" + _NUMBER + r")\]?[ \t]*(?:[-–—:][ \t]*)?(.*)$",
    re.IGNORECASE | re.MULTILINE,
)
_REFINED_QUERY = re.compile(r"\[generated search query\]\s*:\s*(.+)", re.IGNORECASE)
_YEAR = re.compile(r"\b(1[89]\d{2}|2\d{3})\b")
_LAST_N_YEARS = re.compile(r"\b(?:last|past|recent)\s+(\d+)\s+years?\b", re.IGNORECASE)


def parse_score(text: str) -> Tuple[float, str]:
    """
    Extract a relevance score and its reasoning.

    The first "Score:" line wins. Reasoning may come before or after it.

    Raises:
        NoScoreFound: no "Score:" line carries a number
        ScoreOutOfRange: the score lies outside [0, 1] beyond rounding slack
    """
    match = _SCORE_LINE.search(text or "")
    if not match:
        raise NoScoreFound("No 'Score:' line found in completion")
    score = float(match.group(1))
    if score < -SCORE_SLACK or score > 1 + SCORE_SLACK:
        raise ScoreOutOfRange(f"Score {score} outside [0, 1]")
    score = min(1.0, max(0.0, score))
    return score, _reasoning(text)


def _reasoning(text: str) -> str:
    match = _REASONING_LINE.search(text)
    if not match:
        return ""
    rest = text[match.end():]
    following = _FIELD_LINE.search(rest)
    if following:
        rest = rest[:following.start()]
    return rest.strip()


def parse_string_array(text: str) -> List[str]:
    """
    Extract the first well-formed JSON array of strings.

    Surrounding prose and code fences are tolerated.

    Raises:
        NoArrayFound: the text holds no '[' at all
        MalformedArray: no bracketed region decodes to an array of strings
    """
    text = text or ""
    if "[" not in text:
        raise NoArrayFound("No JSON array in completion")
    decoder = json.JSONDecoder()
    position = text.find("[")
    while position != -1:
        try:
            value, _ = decoder.raw_decode(text, position)
        except json.JSONDecodeError:
            value = None
        if isinstance(value, list) and all(isinstance(item, str) for item in value):
            return list(value)
        position = text.find("[", position + 1)
    raise MalformedArray("No well-formed array of strings in completion")


def format_keywords(keywords: Sequence[str]) -> str:
    return "[Start] " + ", ".join(keywords) + " [End]"


def parse_keywords(text: str) -> List[str]:
    """
    Read comma-separated keywords between "[Start]" and the following "[End]".

    Raises:
        MarkersNotFound: either marker is absent
        EmptyKeywordList: nothing nonempty lies between the markers
    """
    text = text or ""
    start = text.find("[Start]")
    if start == -1:
        raise MarkersNotFound("Missing [Start] marker")
    end = text.find("[End]", start)
    if end == -1:
        raise MarkersNotFound("Missing [End] marker")
    body = text[start + len("[Start]"):end]
    keywords = [token.strip() for token in body.split(",") if token.strip()]
    if not keywords:
        raise EmptyKeywordList("No keywords between markers")
    return keywords


def parse_refined_query(text: str) -> str:
    """Read the "[Generated Search Query]" line, falling back to the first nonempty line."""
    text = (text or "").strip()
    match = _REFINED_QUERY.search(text)
    if match:
        candidate = match.group(1).strip()
    else:
        candidate = next((line.strip() for line in text.splitlines() if line.strip()), "")
    candidate = candidate.strip().strip('"').strip()
    if not candidate or candidate == "<your query here>":
        raise MissingField("Generated Search Query")
    return candidate


@dataclass(frozen=True)
class RerankLine:
    index: int
    score: float
    justification: str


def parse_rerank(text: str, n: int) -> List[RerankLine]:
    """
    Parse "Document [index]: [score] - [justification]" lines.

    Scores are returned as written; scaling is left to the caller.

    Raises:
        NoLinesMatched: no line has the expected shape
        IndexOutOfRange: an index falls outside [1, n]
        DuplicateIndex: an index appears twice
    """
    entries: List[RerankLine] = []
    seen = set()
    for match in _RERANK_LINE.finditer(text or ""):
        index = int(match.group(1))
        if not 1 <= index <= n:
            raise IndexOutOfRange(f"Document index {index} outside [1, {n}]")
        if index in seen:
            raise DuplicateIndex(f"Document index {index} appears twice")
        seen.add(index)
        entries.append(RerankLine(index, float(match.group(2)), (match.group(3) or "").strip()))
    if not entries:
        raise NoLinesMatched("No 'Document N: score - justification' lines found")
    return entries


# Query interpretation

INTERPRETATION_LABELS = {
    "user query": "user_query",
    "query intent": "intent",
    "domain": "domain",
    "suitable sources": "sources",
    "needs expansion": "needs_expansion",
    "expansion reason": "expansion_reason",
    "expanded queries": "expanded_queries",
    "time requirement description": "time_requirement",
    "time requirement": "time_requirement",
    "source reason": "source_reason",
}
_LABEL_LINE = re.compile(
    r"^[\s*#\-]*(" + "|".join(sorted(map(re.escape, INTERPRETATION_LABELS), key=len, reverse=True))
    + r")[\s*]*:[\s*]*(.*)$",
    re.IGNORECASE,
)
_BULLET = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s*")
_TRUE = {"true", "yes", "y"}
_FALSE = {"false", "no", "n"}


def _split_fields(text: str) -> Dict[str, List[str]]:
    fields: Dict[str, List[str]] = {}
    current: Optional[str] = None
    for line in (text or "").splitlines():
        match = _LABEL_LINE.match(line)
        if match:
            current = INTERPRETATION_LABELS[match.group(1).lower()]
            fields.setdefault(current, [])
            value = match.group(2).strip()
            if value:
                fields[current].append(value)
        elif current and line.strip():
            fields[current].append(line.strip())
    return fields


def parse_bool(value: str) -> bool:
    token = value.strip().strip(".").lower()
    if token in _TRUE:
        return True
    if token in _FALSE:
        return False
    raise MalformedBoolean(f"Cannot read '{value}' as a boolean")


def split_sources(value: str) -> Tuple[Tuple[SourceKind, ...], Tuple[str, ...]]:
    """Split a source list into recognised kinds and the names that match none."""
    sources, unknown = [], []
    for name in re.split(r"[,;/]|\band\b", value):
        name = name.strip().strip(".")
        if not name:
            continue
        try:
            sources.append(SourceKind.parse(name))
        except ValueError:
            unknown.append(name)
    return tuple(dict.fromkeys(sources)), tuple(unknown)


def parse_sources(value: str) -> Tuple[SourceKind, ...]:
    """
    Raises:
        UnknownSource: a name matches no SourceKind
    """
    sources, unknown = split_sources(value)
    if unknown:
        raise UnknownSource(unknown[0])
    return sources


def parse_time_requirement(value: str, reference: Optional[date] = None) -> TemporalConstraint:
    """Read a time-requirement description into bounds.

    "NO" means no constraint. Relative phrases such as "last 5 years" resolve
    against ``reference``.
    """
    text = value.strip()
    lowered = text.lower().strip(".")
    if not lowered or lowered in ("no", "none", "n/a", "false"):
        return TemporalConstraint()

    relative = _LAST_N_YEARS.search(text)
    if relative and reference is not None:
        span = int(relative.group(1))
        return TemporalConstraint.from_years(lower=reference.year - span, upper=reference.year)

    years = sorted(int(y) for y in _YEAR.findall(text))
    if not years:
        return TemporalConstraint()
    if len(years) >= 2:
        return TemporalConstraint.from_years(lower=years[0], upper=years[-1])
    year = years[0]
    if re.search(r"\b(since|after|from|onwards?|later than|newer than)\b", lowered):
        return TemporalConstraint.from_years(lower=year)
    if re.search(r"\b(before|until|till|up to|prior to|earlier than|older than)\b", lowered):
        return TemporalConstraint.from_years(upper=year)
    return TemporalConstraint.from_years(lower=year, upper=year)


def parse_interpretation(
    text: str,
    reference: Optional[date] = None,
    fallback_sources: Sequence[SourceKind] = (),
) -> QueryInterpretation:
    """
    Parse a labeled interpretation block into a QueryInterpretation.

    Args:
        text: the completion
        reference: date relative time phrases resolve against
        fallback_sources: used when the model names no recognised source. When
            given, unrecognised names are dropped with a warning instead of raising

    Raises:
        MissingField: a required label is absent
        UnknownSource: a source name matches no SourceKind and no fallback is given
        MalformedBoolean: "Needs Expansion" is not a boolean
    """
    fields = _split_fields(text)
    for required, label in (
        ("intent", "Query Intent"),
        ("sources", "Suitable Sources"),
        ("needs_expansion", "Needs Expansion"),
    ):
        if required not in fields:
            raise MissingField(label)

    def joined(name: str) -> str:
        return " ".join(fields.get(name, [])).strip()

    named = ", ".join(fields["sources"])
    if fallback_sources:
        sources, unknown = split_sources(named)
        if unknown:
            logger.warning(f"Ignoring unrecognised sources: {', '.join(unknown)}")
    else:
        sources = parse_sources(named)
    if not sources:
        if not fallback_sources:
            raise MissingField("Suitable Sources")
        sources = tuple(fallback_sources)

    needs_expansion = parse_bool(joined("needs_expansion"))
    expanded = [_BULLET.sub("", line).strip() for line in fields.get("expanded_queries", [])]
    expanded = list(dict.fromkeys(q for q in expanded if q))

    intent_text = joined("intent")
    return QueryInterpretation(
        intent=QueryIntent.from_text(intent_text),
        intent_text=intent_text,
        domain=joined("domain"),
        temporal=parse_time_requirement(joined("time_requirement"), reference),
        sources=sources,
        needs_expansion=needs_expansion and bool(expanded),
        expansion_reason=joined("expansion_reason"),
        refined_queries=tuple(expanded),
        source_reason=joined("source_reason"),
    )
