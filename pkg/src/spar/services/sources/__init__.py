"""Academic source adapters."""

from .arxiv import ArxivAdapter
from .base import SearchPage, SourceAdapter
from .openalex import OpenAlexAdapter
from .pubmed import PubMedAdapter
from .semantic_scholar import SemanticScholarAdapter
from .web import FixtureWebProvider, NullWebProvider, WebResult, WebSearchAdapter

__all__ = [
    "ArxivAdapter",
    "FixtureWebProvider",
    "NullWebProvider",
    "OpenAlexAdapter",
    "PubMedAdapter",
    "SearchPage",
    "SemanticScholarAdapter",
    "SourceAdapter",
    "WebResult",
    "WebSearchAdapter",
]
