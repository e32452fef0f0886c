"""Shared data types."""

from .paper import (
    JudgedPaper,
    JudgeVariant,
    PaperRecord,
    RankedPaper,
    RelevanceJudgement,
    SourceKind,
    dedup_key,
    normalize_title,
)
from .query import QueryIntent, QueryInterpretation, TemporalConstraint, UserQuery
from .state import MetricCounts, SearchState

__all__ = [
    "JudgedPaper",
    "JudgeVariant",
    "MetricCounts",
    "PaperRecord",
    "RankedPaper",
    "QueryIntent",
    "QueryInterpretation",
    "RelevanceJudgement",
    "SearchState",
    "SourceKind",
    "TemporalConstraint",
    "UserQuery",
    "dedup_key",
    "normalize_title",
]
