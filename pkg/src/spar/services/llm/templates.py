"""Prompt templates rendered through Jinja2."""

import enum
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import FrozenSet, Mapping

from jinja2 import Environment, FileSystemLoader, StrictUndefined, meta

from ...errors import MissingBinding, UnknownTemplate

TEMPLATES_DIR = Path(__file__).resolve().parent.parent.parent / "templates" / "prompts"


class PromptId(enum.Enum):
    QUERY_INTERPRETATION = "QueryInterpretation"
    QUERY_REFINEMENT = "QueryRefinement"
    KEYWORD_EXTRACTION = "KeywordExtraction"
    RELEVANCE_BRIEF = "RelevanceBrief"
    RELEVANCE_COMPLEX = "RelevanceComplex"
    QUERY_EVOLUTION = "QueryEvolution"
    RERANK_WITH_TIME = "RerankWithTime"
    RERANK_NO_TIME = "RerankNoTime"


TEMPLATE_FILES = {
    PromptId.QUERY_INTERPRETATION: "query_interpretation.txt",
    PromptId.QUERY_REFINEMENT: "query_refinement.txt",
    PromptId.KEYWORD_EXTRACTION: "keyword_extraction.txt",
    PromptId.RELEVANCE_BRIEF: "relevance_brief.txt",
    PromptId.RELEVANCE_COMPLEX: "relevance_complex.txt",
    PromptId.QUERY_EVOLUTION: "query_evolution.txt",
    PromptId.RERANK_WITH_TIME: "rerank_with_time.txt",
    PromptId.RERANK_NO_TIME: "rerank_no_time.txt",
}


@lru_cache(maxsize=1)
def _environment() -> Environment:
    return Environment(
        loader=FileSystemLoader(str(TEMPLATES_DIR)),
        autoescape=False,
        keep_trailing_newline=True,
        undefined=StrictUndefined,
    )


@dataclass(frozen=True)
class PromptTemplate:
    """A prompt body with its declared placeholder names."""

    template_id: PromptId
    body: str
    placeholders: FrozenSet[str]

    @classmethod
    def load(cls, template_id: PromptId) -> "PromptTemplate":
        env = _environment()
        filename = TEMPLATE_FILES[template_id]
        body, _, _ = env.loader.get_source(env, filename)
        placeholders = frozenset(meta.find_undeclared_variables(env.parse(body)))
        return cls(template_id=template_id, body=body, placeholders=placeholders)


def get_template(template_id) -> PromptTemplate:
    """Look up a template by PromptId or by its string id.

    Raises:
        UnknownTemplate: no template is registered under the id
    """
    if not isinstance(template_id, PromptId):
        try:
            template_id = PromptId(template_id)
        except ValueError as e:
            raise UnknownTemplate(f"Unknown prompt template: {template_id}") from e
    return _load_cached(template_id)


@lru_cache(maxsize=None)
def _load_cached(template_id: PromptId) -> PromptTemplate:
    return PromptTemplate.load(template_id)


def render(template_id, bindings: Mapping[str, object]) -> str:
    """
    Render a prompt template.

    Args:
        template_id: PromptId or its string value
        bindings: Placeholder name to value; values are rendered with str()

    Returns:
        The prompt text with every placeholder substituted

    Raises:
        UnknownTemplate: unknown template id
        MissingBinding: a placeholder has no binding
    """
    template = get_template(template_id)
    missing = sorted(template.placeholders - set(bindings))
    if missing:
        raise MissingBinding(missing[0])
    values = {name: "" if bindings[name] is None else str(bindings[name]) for name in template.placeholders}
    return _environment().from_string(template.body).render(**values)
