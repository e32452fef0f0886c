"""Pipeline agents."""

from .base import BaseAgent
from .judgement import JudgementAgent, filter_related
from .orchestrator import Orchestrator, RunLedger, RunReport, select_top_k
from .query_evolver import QueryEvolverAgent, jaccard, select_and_filter
from .query_understanding import QueryUnderstandingAgent, build_query_list
from .refchain import RefChainAgent
from .reranker import RerankerAgent
from .retrieval import RetrievalAgent, merge_dedup

__all__ = [
    "BaseAgent",
    "JudgementAgent",
    "Orchestrator",
    "QueryEvolverAgent",
    "QueryUnderstandingAgent",
    "RefChainAgent",
    "RerankerAgent",
    "RetrievalAgent",
    "RunLedger",
    "RunReport",
    "build_query_list",
    "filter_related",
    "jaccard",
    "merge_dedup",
    "select_and_filter",
    "select_top_k",
]
