"""Exact weighted similarity search, relevance feedback, fusion and cohorts."""

from .feedback import RRF_C, feedback_search, fuse_rankings, resolve_cohort
from .persist import dumps, load_index, loads, save_index
from .search import (
    DEFAULT_EPSILON,
    SimilarityIndex,
    build_index,
    normalize_weights,
    query,
    update_weights,
    weighted_distance,
)
from .types import Cohort, FeedbackState, RankedList

__all__ = [
    "Cohort",
    "DEFAULT_EPSILON",
    "FeedbackState",
    "RRF_C",
    "RankedList",
    "SimilarityIndex",
    "build_index",
    "dumps",
    "feedback_search",
    "fuse_rankings",
    "load_index",
    "loads",
    "normalize_weights",
    "query",
    "resolve_cohort",
    "save_index",
    "update_weights",
    "weighted_distance",
]
