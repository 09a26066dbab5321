"""Ontology-driven query expansion and keyword vector-space search."""

from .activation import (
    ActivationResult,
    ExpandedQuery,
    distance_constrained_spread,
    expand,
    free_spread,
    relation_constrained_spread,
)
from .evaluation import (
    average_precision,
    evaluate_run,
    f_measure,
    fisher_randomization,
    improvement,
    interpolated_precision_curve,
    mean_average_precision,
)
from .knowledge_base import KnowledgeBase, load_fixture, load_kb_dir, load_knowledge_base
from .pipeline import SemanticSearch
from .query_analysis import QueryAnalyzer, RelationPattern
from .retrieval import Document, InvertedIndex, build_index, rank, tf_idf_weight
from .text import normalize_text

__version__ = "0.1.0"
