from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RankedList:
    """Ordered ``(vector_id, distance)`` pairs, closest first.

    Fused lists carry ``-score`` in the distance slot, so distances are
    only required to be non-decreasing, not non-negative.
    """

    ids: tuple
    distances: np.ndarray = field(repr=False)

    def __post_init__(self):
        ids = tuple(self.ids)
        d = np.asarray(self.distances, dtype=np.float64).reshape(-1)
        if len(ids) != d.size:
            raise ValueError("ids and distances differ in length")
        if len(set(ids)) != len(ids):
            raise ValueError("ranked ids must be unique")
        if d.size > 1 and np.any(np.diff(d) < 0):
            raise ValueError("distances must be non-decreasing")
        d.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "distances", d)

    def __eq__(self, other):
        if not isinstance(other, RankedList):
            return NotImplemented
        return self.ids == other.ids and np.array_equal(self.distances, other.distances)

    __hash__ = None

    def __len__(self):
        return len(self.ids)

    def __iter__(self):
        return iter(zip(self.ids, self.distances.tolist()))

    def rank_of(self, vector_id):
        """1-based rank of ``vector_id``, or ``None`` if absent."""
        try:
            return self.ids.index(vector_id) + 1
        except ValueError:
            return None

    def head(self, k):
        return RankedList(self.ids[:k], self.distances[:k])

    def to_csv(self):
        lines = ["rank,vector_id,distance"]
        lines += [f"{r},{i},{d:.17g}" for r, (i, d) in enumerate(self, 1)]
        return "\n".join(lines) + "\n"


@dataclass
class FeedbackState:
    """Relevance-feedback bookkeeping owned by one search.

    Attributes
    ----------
    positive_set : list
        Ids treated as positives, in the order they were first added.
    round : int
        Completed weight updates.
    last_weights : ndarray
        Weights before the most recent update.
    weights : ndarray
        Weights after the most recent update.
    deltas : list of float
        ``max_j |dw_j| / w_j`` per round.
    converged : bool
        The last delta fell below the tolerance.
    """

    positive_set: list = field(default_factory=list)
    round: int = 0
    last_weights: np.ndarray = None
    weights: np.ndarray = None
    deltas: list = field(default_factory=list)
    converged: bool = False

    def add_positives(self, ids):
        seen = set(self.positive_set)
        for i in ids:
            if i not in seen:
                self.positive_set.append(i)
                seen.add(i)


@dataclass(frozen=True)
class Cohort:
    """Patients behind a ranked patch list.

    ``support[i]`` counts the ranked patches of ``patient_ids[i]``.
    """

    patient_ids: tuple
    support: tuple
    source_patches: tuple

    def __len__(self):
        return len(self.patient_ids)

    def support_of(self, patient_id):
        return dict(zip(self.patient_ids, self.support)).get(patient_id, 0)
