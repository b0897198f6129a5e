import math
from collections import defaultdict

import numpy as np

from ..exceptions import MissingLineage
from .search import DEFAULT_EPSILON, update_weights
from .types import Cohort, FeedbackState, RankedList

RRF_C = 60


def feedback_search(index, q, k, m_positives=50, max_rounds=10, tol=1e-3, epsilon=DEFAULT_EPSILON):
    """Relevance-feedback retrieval.

    Each round queries under the current weights, adds the top
    ``m_positives`` ids to the positive set and refits the weights on
    that set. Stops once no weight moves by ``tol`` relative to its old
    value, or after ``max_rounds`` updates.

    Returns
    -------
    ranked : RankedList
        Top ``k`` under the final weights.
    state : FeedbackState
    """
    if m_positives < 2:
        raise ValueError("m_positives must be at least 2")
    if max_rounds < 0:
        raise ValueError("max_rounds must be non-negative")
    view = index
    state = FeedbackState(last_weights=index.weights_, weights=index.weights_)
    for _ in range(max_rounds):
        state.add_positives(view.query(q, m_positives).ids)
        if len(state.positive_set) < 2:
            # a one-vector index has nothing to learn from
            state.converged = True
            break
        w = update_weights(view, state.positive_set, epsilon)
        delta = float(np.max(np.abs(w - view.weights_) / view.weights_))
        state.last_weights, state.weights = view.weights_, w
        state.deltas.append(delta)
        state.round += 1
        view = view.with_weights(w)
        if delta < tol:
            state.converged = True
            break
    return view.query(q, k), state


def fuse_rankings(lists, k=None, c=RRF_C):
    """Reciprocal-rank fusion of several ranked lists.

    ``score(id) = sum over lists of 1 / (c + rank)`` with 1-based ranks;
    the output distance field holds ``-score``. Equal scores keep the
    order in which ids were first seen, scanning the lists in turn.
    """
    if not lists:
        raise ValueError("need at least one ranked list")
    terms = defaultdict(list)
    for ranked in lists:
        for rank, vid in enumerate(ranked.ids, 1):
            terms[vid].append(1.0 / (c + rank))
    # fsum is correctly rounded, so equal multisets of terms give equal scores
    ids = list(terms)
    scores = np.array([math.fsum(terms[v]) for v in ids])
    order = np.argsort(-scores, kind="stable")
    if k is not None:
        order = order[:k]
    return RankedList([ids[i] for i in order], -scores[order])


def resolve_cohort(ranked, lineage, exclude_patients=()):
    """Map ranked patches to patients.

    Parameters
    ----------
    lineage : mapping
        ``patch_id -> (wsi_id, patient_id)``.
    exclude_patients : iterable of str
        Patients dropped together with their patches, e.g. the query
        patient.

    Returns
    -------
    Cohort
        Patients ordered by patch count, then by their best rank.
    """
    excluded = set(exclude_patients)
    support, best, sources = {}, {}, []
    for rank, pid in enumerate(ranked.ids):
        if pid not in lineage:
            raise MissingLineage(pid)
        patient = lineage[pid][1]
        if patient in excluded:
            continue
        sources.append(pid)
        support[patient] = support.get(patient, 0) + 1
        best.setdefault(patient, rank)
    order = sorted(support, key=lambda p: (-support[p], best[p]))
    return Cohort(tuple(order), tuple(support[p] for p in order), tuple(sources))
