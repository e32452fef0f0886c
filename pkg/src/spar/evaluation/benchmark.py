"""Benchmark loading: questions with gold relevance labels."""

import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Any, Iterator, List, Optional, Tuple, Union

from ..errors import SchemaError
from ..models.paper import normalize_title
from ..models.query import UserQuery
from ..utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class GoldStub:
    """A reference answer. Only the id and title take part in matching."""

    title: str
    paper_id: str = ""
    abstract: str = ""
    authors: Tuple[str, ...] = ()
    year: Optional[int] = None
    citation_count: Optional[int] = None
    source: str = ""

    @property
    def normalized_title(self) -> str:
        return normalize_title(self.title)


@dataclass(frozen=True)
class BenchmarkCase:
    case_id: str
    question: str
    answers: Tuple[GoldStub, ...]
    search_time: Optional[date] = None
    compat: bool = False

    @property
    def query(self) -> UserQuery:
        return UserQuery(text=self.question, search_time=self.search_time)


def _records(text: str) -> Iterator[Tuple[int, Any]]:
    """(line number, record) pairs from a JSON array or a JSON-lines document."""
    if text.lstrip().startswith("["):
        try:
            items = json.loads(text)
        except json.JSONDecodeError as e:
            raise SchemaError(e.lineno, "<document>", e.msg) from e
        for index, item in enumerate(items, start=1):
            yield index, item
        return
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            yield number, json.loads(line)
        except json.JSONDecodeError as e:
            raise SchemaError(number, "<record>", e.msg) from e


def _optional_int(value: Any, line: int, name: str) -> Optional[int]:
    if value is None or value == "":
        return None
    try:
        return int(value)
    except (TypeError, ValueError):
        raise SchemaError(line, name, f"expected an integer, got {value!r}")


def _search_time(value: Any, line: int) -> Optional[date]:
    if value is None or value == "":
        return None
    try:
        return date.fromisoformat(str(value)[:10])
    except ValueError:
        raise SchemaError(line, "search_time", f"expected YYYY-MM-DD, got {value!r}")


def _stub(item: Any, line: int, index: int) -> GoldStub:
    name = f"answers[{index}]"
    if isinstance(item, str):
        item = {"title": item}
    if not isinstance(item, dict):
        raise SchemaError(line, name, "expected an object or a title string")
    title = item.get("title")
    if not isinstance(title, str) or not normalize_title(title):
        raise SchemaError(line, f"{name}.title", "missing or empty")
    authors = item.get("authors") or ()
    if isinstance(authors, str):
        authors = [a.strip() for a in authors.split(",") if a.strip()]
    return GoldStub(
        title=title.strip(),
        paper_id=str(item.get("paper_id") or "").strip(),
        abstract=str(item.get("abstract") or ""),
        authors=tuple(authors),
        year=_optional_int(item.get("year"), line, f"{name}.year"),
        citation_count=_optional_int(item.get("citation_count"), line, f"{name}.citation_count"),
        source=str(item.get("source") or ""),
    )


def parse_case(record: Any, line: int) -> BenchmarkCase:
    """
    Build a case from one record.

    Records carrying "answers" as objects follow the full schema; "answers"
    or "answer" holding plain title strings load in compatibility mode.

    Raises:
        SchemaError: a field is missing, malformed, or the answers repeat a paper
    """
    if not isinstance(record, dict):
        raise SchemaError(line, "<record>", "expected an object")
    question = record.get("question")
    if not isinstance(question, str) or not question.strip():
        raise SchemaError(line, "question", "missing or empty")

    answers = record.get("answers", record.get("answer"))
    if isinstance(answers, str):
        answers = [answers]
    if not isinstance(answers, list) or not answers:
        raise SchemaError(line, "answers", "missing or empty")
    compat = all(isinstance(a, str) for a in answers)
    stubs = tuple(_stub(item, line, index) for index, item in enumerate(answers))

    titles = [s.normalized_title for s in stubs]
    ids = [s.paper_id.casefold() for s in stubs if s.paper_id]
    if len(set(titles)) != len(titles) or len(set(ids)) != len(ids):
        raise SchemaError(line, "answers", "duplicate reference answers")

    return BenchmarkCase(
        case_id=str(record.get("id") or f"case-{line}"),
        question=question.strip(),
        answers=stubs,
        search_time=_search_time(record.get("search_time"), line),
        compat=compat,
    )


def load_benchmark(path: Union[str, Path]) -> List[BenchmarkCase]:
    """
    Load benchmark cases from a JSON-lines file or a JSON array.

    Raises:
        FileNotFoundError: no such file
        SchemaError: a record does not match the schema
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    cases = [parse_case(record, line) for line, record in _records(text)]
    compat = sum(case.compat for case in cases)
    if compat:
        logger.info(f"{compat} of {len(cases)} cases loaded in title-only compatibility mode")
    logger.info(f"Loaded {len(cases)} cases from {path}")
    return cases
