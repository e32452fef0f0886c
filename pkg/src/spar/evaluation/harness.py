"""Evaluation harness: per-case scoring, macro averages and ablation sweeps."""

import itertools
import json
from dataclasses import dataclass, field
from statistics import fmean
from typing import Any, Dict, List, Optional, Sequence

from ..agents.orchestrator import ARTIFACT_EXCLUDED_KEYS, Orchestrator, RunReport
from ..config.settings import RunConfig, Toggles
from ..errors import CassetteMiss
from ..models.paper import SourceKind
from ..models.state import MetricCounts
from ..utils.logging import get_logger
from .benchmark import BenchmarkCase
from .metrics import f1, match, precision, recall, recall_at_k

logger = get_logger(__name__)


@dataclass
class CaseResult:
    """Metrics for one benchmark question; `error` is set when the run failed."""

    case_id: str
    question: str
    counts: MetricCounts = field(default_factory=MetricCounts)
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    recall_at: Dict[int, float] = field(default_factory=dict)
    raw_doc_num: int = 0
    valid_doc_num: int = 0
    raw_recall: float = 0.0
    searched_queries: int = 0
    warnings: int = 0
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "case_id": self.case_id,
            "question": self.question,
            "tp": self.counts.tp,
            "fp": self.counts.fp,
            "fn": self.counts.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "recall_at": {str(k): v for k, v in sorted(self.recall_at.items())},
            "raw_doc_num": self.raw_doc_num,
            "valid_doc_num": self.valid_doc_num,
            "raw_recall": self.raw_recall,
            "searched_queries": self.searched_queries,
            "warnings": self.warnings,
            "error": self.error,
        }


def score_case(case: BenchmarkCase, report: RunReport, ks: Sequence[int]) -> CaseResult:
    counts = match(report.records, case.answers)
    p, r = precision(counts), recall(counts)
    return CaseResult(
        case_id=case.case_id,
        question=case.question,
        counts=counts,
        precision=p,
        recall=r,
        f1=f1(p, r),
        recall_at={k: recall_at_k(report.records, case.answers, k) for k in ks},
        raw_doc_num=report.raw_doc_num,
        valid_doc_num=report.valid_doc_num,
        raw_recall=recall(match(report.raw_records, case.answers)),
        searched_queries=len(report.searched_queries),
        warnings=len(report.warnings),
    )


@dataclass
class EvalReport:
    label: str
    cases: List[CaseResult]
    config: Dict[str, Any]
    ks: Sequence[int] = (5, 10)

    @property
    def successful(self) -> List[CaseResult]:
        return [case for case in self.cases if case.ok]

    def macro(self) -> Dict[str, float]:
        """Arithmetic means over the cases that ran; all zeros when none did."""
        cases = self.successful

        def mean(values: List[float]) -> float:
            return fmean(values) if values else 0.0

        averages = {
            "precision": mean([c.precision for c in cases]),
            "recall": mean([c.recall for c in cases]),
            "f1": mean([c.f1 for c in cases]),
            "raw_doc_num": mean([c.raw_doc_num for c in cases]),
            "valid_doc_num": mean([c.valid_doc_num for c in cases]),
            "raw_recall": mean([c.raw_recall for c in cases]),
        }
        for k in self.ks:
            averages[f"recall@{k}"] = mean([c.recall_at.get(k, 0.0) for c in cases])
        return averages

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "config": self.config,
            "macro": self.macro(),
            "cases": [case.to_dict() for case in self.cases],
            "failed": [case.case_id for case in self.cases if not case.ok],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def format_table(reports: Sequence[EvalReport]) -> str:
    """Plain-text metric table, one row per report."""
    ks = sorted({k for report in reports for k in report.ks})
    headers = ["run", "cases", "failed", "P", "R", "F1", *(f"R@{k}" for k in ks), "raw", "valid", "rawR"]
    rows = []
    for report in reports:
        macro = report.macro()
        rows.append([
            report.label,
            str(len(report.cases)),
            str(len(report.cases) - len(report.successful)),
            f"{macro['precision']:.4f}",
            f"{macro['recall']:.4f}",
            f"{macro['f1']:.4f}",
            *(f"{macro.get(f'recall@{k}', 0.0):.4f}" for k in ks),
            f"{macro['raw_doc_num']:.1f}",
            f"{macro['valid_doc_num']:.1f}",
            f"{macro['raw_recall']:.4f}",
        ])
    widths = [max(len(row[i]) for row in [headers, *rows]) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in [headers, *rows]]
    return "\n".join(lines) + "\n"


async def run_eval(
    orchestrator: Orchestrator,
    cases: Sequence[BenchmarkCase],
    config: RunConfig,
    baseline: Optional[SourceKind] = None,
    label: Optional[str] = None,
) -> EvalReport:
    """
    Run every case and score it.

    Cases run one after another on the shared orchestrator. A failing case
    is recorded and skipped in the averages; CassetteMiss propagates.
    """
    orchestrator.configure(config)
    label = label or (f"baseline:{baseline.value}" if baseline else config.toggles.label())
    results: List[CaseResult] = []
    for case in cases:
        try:
            if baseline is not None:
                report = await orchestrator.run_baseline(case.query, baseline)
            else:
                report = await orchestrator.run(case.query)
        except CassetteMiss:
            raise
        except Exception as e:
            logger.error(f"Case {case.case_id} failed: {type(e).__name__}: {e}")
            results.append(CaseResult(case.case_id, case.question, error=f"{type(e).__name__}: {e}"))
            continue
        results.append(score_case(case, report, config.recall_at_k))

    echo = {k: v for k, v in config.echo().items() if k not in ARTIFACT_EXCLUDED_KEYS}
    report = EvalReport(label=label, cases=results, config=echo, ks=tuple(config.recall_at_k))
    logger.info(f"{label}: {report.macro()}")
    return report


def toggle_grid() -> List[Dict[str, bool]]:
    """Every on/off combination of the ablation toggles, all-on first."""
    names = Toggles.names()
    return [dict(zip(names, values)) for values in itertools.product([True, False], repeat=len(names))]


async def sweep(
    orchestrator: Orchestrator, cases: Sequence[BenchmarkCase], config: RunConfig
) -> List[EvalReport]:
    """One evaluation per toggle combination."""
    return [await run_eval(orchestrator, cases, config.with_toggles(**toggles)) for toggles in toggle_grid()]
