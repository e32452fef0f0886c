"""Benchmarks, metrics and the evaluation harness."""

from .benchmark import BenchmarkCase, GoldStub, load_benchmark
from .harness import CaseResult, EvalReport, format_table, run_eval, sweep, toggle_grid
from .metrics import f1, match, precision, recall, recall_at_k

__all__ = [
    "BenchmarkCase",
    "CaseResult",
    "EvalReport",
    "GoldStub",
    "f1",
    "format_table",
    "load_benchmark",
    "match",
    "precision",
    "recall",
    "recall_at_k",
    "run_eval",
    "sweep",
    "toggle_grid",
]
