"""Query-side types: the user's question and its structured interpretation."""

import enum
from dataclasses import dataclass, field
from datetime import date
from typing import Optional, Tuple

from ..errors import PreconditionError
from .paper import SourceKind


@dataclass(frozen=True)
class UserQuery:
    """A research question, optionally pinned to a benchmark search date."""

    text: str
    search_time: Optional[date] = None

    def __post_init__(self) -> None:
        if not self.text or not self.text.strip():
            raise PreconditionError("Query text must be nonempty")


@dataclass(frozen=True)
class TemporalConstraint:
    """Publication-date bounds detected in a query."""

    lower: Optional[date] = None
    upper: Optional[date] = None
    required: bool = False

    def __post_init__(self) -> None:
        if self.lower and self.upper and self.lower > self.upper:
            raise PreconditionError(f"Temporal lower bound {self.lower} is after upper bound {self.upper}")

    @classmethod
    def from_years(
        cls, lower: Optional[int] = None, upper: Optional[int] = None, required: bool = True
    ) -> "TemporalConstraint":
        return cls(
            lower=date(lower, 1, 1) if lower is not None else None,
            upper=date(upper, 12, 31) if upper is not None else None,
            required=required,
        )

    @property
    def lower_year(self) -> Optional[int]:
        return self.lower.year if self.lower else None

    @property
    def upper_year(self) -> Optional[int]:
        return self.upper.year if self.upper else None

    @property
    def label(self) -> str:
        """Textual form of the bound, e.g. "2020-2025", "since 2020" or "until 2025"."""
        if self.lower and self.upper:
            if self.lower.year == self.upper.year:
                return str(self.lower.year)
            return f"{self.lower.year}-{self.upper.year}"
        if self.lower:
            return f"since {self.lower.year}"
        if self.upper:
            return f"until {self.upper.year}"
        return ""

    def mentioned_in(self, text: str) -> bool:
        """True when every bound year appears in the text."""
        years = [str(y) for y in (self.lower_year, self.upper_year) if y is not None]
        return all(year in text for year in years)

    def admits_year(self, year: Optional[int]) -> bool:
        """Year post-filter. Unknown years are admitted."""
        if year is None:
            return True
        if self.lower and year < self.lower.year:
            return False
        if self.upper and year > self.upper.year:
            return False
        return True

    def with_cutoff(self, cutoff: Optional[date]) -> "TemporalConstraint":
        """Tighten the upper bound with a search-time cutoff without marking the query time-sensitive."""
        if cutoff is None:
            return self
        upper = min(self.upper, cutoff) if self.upper else cutoff
        lower = self.lower if not self.lower or self.lower <= upper else None
        return TemporalConstraint(lower=lower, upper=upper, required=self.required)

    def to_dict(self) -> dict:
        return {
            "lower": self.lower.isoformat() if self.lower else None,
            "upper": self.upper.isoformat() if self.upper else None,
            "required": self.required,
        }


NO_TIME_CONSTRAINT = TemporalConstraint()


class QueryIntent(enum.Enum):
    SURVEY = "Survey"
    RECENT_ADVANCES = "RecentAdvances"
    METHOD_COMPARISON = "MethodComparison"
    OTHER = "Other"

    @classmethod
    def from_text(cls, text: str) -> "QueryIntent":
        """Map a free-text intent onto the nearest member by keyword rules."""
        lowered = (text or "").lower()
        if "review" in lowered or "survey" in lowered:
            return cls.SURVEY
        if "recent" in lowered or "state-of-the-art" in lowered or "state of the art" in lowered:
            return cls.RECENT_ADVANCES
        if "compar" in lowered:
            return cls.METHOD_COMPARISON
        return cls.OTHER


DEFAULT_SOURCES: Tuple[SourceKind, ...] = (
    SourceKind.ARXIV,
    SourceKind.OPENALEX,
    SourceKind.SEMANTIC_SCHOLAR,
    SourceKind.PUBMED,
)
FALLBACK_SOURCES: Tuple[SourceKind, ...] = (SourceKind.SEMANTIC_SCHOLAR, SourceKind.OPENALEX)


@dataclass(frozen=True)
class QueryInterpretation:
    """Structured output of the understanding stage."""

    intent: QueryIntent
    sources: Tuple[SourceKind, ...]
    needs_expansion: bool
    refined_queries: Tuple[str, ...] = ()
    domain: str = ""
    temporal: TemporalConstraint = field(default_factory=TemporalConstraint)
    expansion_reason: str = ""
    source_reason: str = ""
    intent_text: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "sources", tuple(dict.fromkeys(self.sources)))
        object.__setattr__(self, "refined_queries", tuple(self.refined_queries))
        if not self.sources:
            raise PreconditionError("Interpretation must select at least one source")
        if self.needs_expansion and not self.refined_queries:
            raise PreconditionError("Expansion requested but no refined queries given")
        if len(set(self.refined_queries)) != len(self.refined_queries):
            raise PreconditionError("Refined queries must be pairwise distinct")

    @classmethod
    def identity(
        cls, query: UserQuery, sources: Tuple[SourceKind, ...] = DEFAULT_SOURCES
    ) -> "QueryInterpretation":
        """Interpretation used when the understanding stage is disabled or fails."""
        return cls(
            intent=QueryIntent.OTHER,
            sources=sources,
            needs_expansion=False,
            refined_queries=(query.text,),
        )

    def to_dict(self) -> dict:
        return {
            "intent": self.intent.value,
            "intent_text": self.intent_text,
            "domain": self.domain,
            "temporal": self.temporal.to_dict(),
            "sources": [s.value for s in self.sources],
            "needs_expansion": self.needs_expansion,
            "expansion_reason": self.expansion_reason,
            "refined_queries": list(self.refined_queries),
            "source_reason": self.source_reason,
        }
