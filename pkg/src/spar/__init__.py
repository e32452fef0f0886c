"""
SPAR - Scholarly paper retrieval
A multi-agent pipeline for academic literature search: query interpretation,
multi-source retrieval, citation expansion, relevance judging and reranking.
"""

__version__ = "0.1.0"
