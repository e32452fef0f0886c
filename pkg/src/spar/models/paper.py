"""Paper records, relevance judgements and canonical identity helpers."""

import enum
import re
import unicodedata
from dataclasses import dataclass
from typing import Optional, Tuple

from ..errors import PreconditionError

DOI_PATTERN = re.compile(r"10\.\d{4,9}/[^\s\"<>]+", re.IGNORECASE)
_WHITESPACE = re.compile(r"\s+")


class SourceKind(enum.Enum):
    """The fixed set of academic sources."""
    GOOGLE = "Google"
    ARXIV = "ArXiv"
    OPENALEX = "OpenAlex"
    SEMANTIC_SCHOLAR = "SemanticScholar"
    PUBMED = "PubMed"

    @property
    def display_name(self) -> str:
        """Human-facing name, as used inside prompts."""
        return {
            SourceKind.GOOGLE: "Google",
            SourceKind.ARXIV: "arXiv",
            SourceKind.OPENALEX: "OpenAlex",
            SourceKind.SEMANTIC_SCHOLAR: "Semantic Scholar",
            SourceKind.PUBMED: "PubMed",
        }[self]

    @property
    def uses_keywords(self) -> bool:
        """Structured sources receive extracted keywords, the rest the full query string."""
        return self in KEYWORD_SOURCES

    @classmethod
    def parse(cls, name: str) -> "SourceKind":
        """Map a free-form source name onto a member, case- and spacing-insensitively."""
        key = re.sub(r"[\s_\-.]", "", name).lower()
        for member in cls:
            if key in (member.value.lower(), member.name.replace("_", "").lower()):
                return member
        if key in ("s2", "semanticscholarorg"):
            return cls.SEMANTIC_SCHOLAR
        if key in ("googlescholar", "web", "websearch"):
            return cls.GOOGLE
        raise ValueError(f"Unknown source: {name}")


KEYWORD_SOURCES = frozenset({SourceKind.SEMANTIC_SCHOLAR, SourceKind.OPENALEX, SourceKind.PUBMED})


class JudgeVariant(enum.Enum):
    """Relevance prompt styles."""
    BRIEF = "brief"
    COMPLEX = "complex"


def normalize_title(text: str) -> str:
    """Normalize a title for identity comparison.

    Lowercases, applies NFC, drops punctuation (no replacement space) and
    collapses whitespace.
    """
    if not text:
        return ""
    text = unicodedata.normalize("NFC", text).lower()
    text = "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))
    return _WHITESPACE.sub(" ", text).strip()


def extract_doi(identifier: str) -> Optional[str]:
    """Return the lowercased DOI embedded in an identifier, if any."""
    if not identifier:
        return None
    match = DOI_PATTERN.search(identifier)
    if not match:
        return None
    return match.group(0).rstrip(".,;)").lower()


@dataclass(frozen=True)
class PaperRecord:
    """One retrieved document with metadata and provenance."""

    canonical_id: str
    title: str
    source: SourceKind
    abstract: str = ""
    authors: Tuple[str, ...] = ()
    year: Optional[int] = None
    venue: Optional[str] = None
    citation_count: Optional[int] = None
    refchain_depth: int = 0
    retrieved_by: str = ""
    reference_ids: Optional[Tuple[str, ...]] = None
    url: Optional[str] = None
    field: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.title or not self.title.strip():
            raise PreconditionError("PaperRecord title must be nonempty")
        if self.refchain_depth not in (0, 1):
            raise PreconditionError(f"refchain_depth must be 0 or 1, got {self.refchain_depth}")
        if self.citation_count is not None and self.citation_count < 0:
            raise PreconditionError("citation_count must be non-negative")
        # Accept lists from callers while keeping the record hashable.
        object.__setattr__(self, "authors", tuple(self.authors or ()))
        if self.reference_ids is not None:
            object.__setattr__(self, "reference_ids", tuple(self.reference_ids))
        if self.abstract is None:
            object.__setattr__(self, "abstract", "")

    @property
    def doi(self) -> Optional[str]:
        return extract_doi(self.canonical_id)

    def to_dict(self) -> dict:
        return {
            "canonical_id": self.canonical_id,
            "title": self.title,
            "abstract": self.abstract,
            "authors": list(self.authors),
            "year": self.year,
            "venue": self.venue,
            "citation_count": self.citation_count,
            "source": self.source.value,
            "refchain_depth": self.refchain_depth,
            "retrieved_by": self.retrieved_by,
            "url": self.url,
            "field": self.field,
        }


def dedup_key(paper: PaperRecord) -> str:
    """Canonical identity under which cross-source duplicates collapse.

    DOI wins over title.
    """
    doi = paper.doi
    if doi:
        return doi
    return "t:" + normalize_title(paper.title)


@dataclass(frozen=True)
class RelevanceJudgement:
    """Relevance score in [0, 1] with the model's reasoning."""

    score: float
    reasoning: str
    prompt_variant: JudgeVariant = JudgeVariant.BRIEF
    judge_model: str = ""
    parse_failed: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise PreconditionError(f"Relevance score must lie in [0, 1], got {self.score}")

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "reasoning": self.reasoning,
            "prompt_variant": self.prompt_variant.value,
            "judge_model": self.judge_model,
            "parse_failed": self.parse_failed,
        }


@dataclass(frozen=True)
class JudgedPaper:
    """A record paired with its judgement; the element type of the Related Pool and Paper Cache."""

    record: PaperRecord
    judgement: RelevanceJudgement

    @property
    def key(self) -> str:
        return dedup_key(self.record)

    @property
    def score(self) -> float:
        return self.judgement.score


@dataclass(frozen=True)
class RankedPaper:
    """A final-ranking entry: the judged paper and the score that placed it."""

    paper: JudgedPaper
    score: float
    reranked: bool = False

    @property
    def record(self) -> PaperRecord:
        return self.paper.record

    def to_dict(self) -> dict:
        return {
            "key": self.paper.key,
            "score": self.score,
            "reranked": self.reranked,
            "judgement": self.paper.judgement.to_dict(),
            "record": self.record.to_dict(),
        }
