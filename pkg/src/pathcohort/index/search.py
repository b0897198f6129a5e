"""Exact weighted nearest-neighbour search in z-scored feature space."""

import copy
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_vector, check_vectors
from ..exceptions import DimensionMismatch, EmptyIndex, TooFewPositives
from .types import RankedList

DEFAULT_EPSILON = 1e-6


def _as_matrix(vectors, ids):
    """Accept a list of FeatureVector or an array plus ids."""
    if len(vectors) and hasattr(vectors[0], "patch_id"):
        dims = {np.asarray(v.values).shape[0] for v in vectors}
        if len(dims) > 1:
            raise DimensionMismatch(f"vectors have mixed lengths {sorted(dims)}")
        return check_vectors([v.values for v in vectors], name="vectors"), [v.patch_id for v in vectors]
    X = check_vectors(vectors, name="vectors")
    if ids is None:
        ids = [str(i) for i in range(X.shape[0])]
    return X, list(ids)


def normalize_weights(w):
    """Rescale positive weights so they sum to their count."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size == 0 or np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be a non-empty vector of positive reals")
    return w * (w.size / w.sum())


class SimilarityIndex(TransformerMixin, BaseEstimator):
    """Exact top-k index under a diagonal weighted Euclidean distance.

    Vectors are z-scored per dimension at fit time (zero-variance
    dimensions keep scale 1) and weights start at one. ``transform`` maps
    raw vectors into the same z-space. A fitted index is never modified
    in place: :meth:`with_weights` returns a new view sharing the data.

    Parameters
    ----------
    n_jobs : int, default=1
        Shards scanned concurrently by :meth:`query`. Results do not
        depend on it.

    Attributes
    ----------
    ids_ : list of str
    mean_, scale_ : ndarray of shape (dim,)
    weights_ : ndarray of shape (dim,)
    """

    def __init__(self, n_jobs=1):
        self.n_jobs = n_jobs

    def fit(self, X, y=None, ids=None):
        if X is None or len(X) == 0:
            raise EmptyIndex("cannot build an index from zero vectors")
        X, ids = _as_matrix(X, ids)
        if len(set(ids)) != len(ids):
            raise ValueError("vector ids must be unique")
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        return self._set_state(X, ids, mean, scale, np.ones(X.shape[1]))

    def _set_state(self, X, ids, mean, scale, weights):
        self.ids_ = list(ids)
        self._pos = {v: i for i, v in enumerate(self.ids_)}
        self.raw_ = X
        self.mean_ = np.asarray(mean, dtype=np.float64)
        self.scale_ = np.asarray(scale, dtype=np.float64)
        self.z_ = self._zscore(X)
        self.weights_ = np.asarray(weights, dtype=np.float64)
        self.n_features_in_ = X.shape[1]
        for a in (self.raw_, self.mean_, self.scale_, self.z_, self.weights_):
            a.setflags(write=False)
        return self

    def _zscore(self, X):
        return (X - self.mean_) / self.scale_

    @property
    def dim(self):
        return self.n_features_in_

    @property
    def n(self):
        return len(self.ids_)

    def __len__(self):
        return self.n

    def transform(self, X):
        check_is_fitted(self, "z_")
        return self._zscore(check_vectors(X, self.dim))

    def vector(self, vector_id, z=True):
        i = self._pos[vector_id]
        return (self.z_ if z else self.raw_)[i]

    def with_weights(self, weights):
        """New view of this index with ``weights`` (normalized to sum ``dim``)."""
        check_is_fitted(self, "z_")
        w = normalize_weights(check_vector(weights, self.dim, "weights"))
        w.setflags(write=False)
        view = copy.copy(self)
        view.weights_ = w
        return view

    def distances(self, q):
        """Weighted distances from raw query ``q`` to every stored vector."""
        check_is_fitted(self, "z_")
        qz = self._zscore(check_vector(q, self.dim, "query"))
        n_jobs = max(int(self.n_jobs or 1), 1)
        if n_jobs == 1 or self.n < 2 * n_jobs:
            return _scan(self.z_, qz, self.weights_)
        bounds = np.linspace(0, self.n, n_jobs + 1).astype(int)
        with ThreadPoolExecutor(n_jobs) as pool:
            parts = pool.map(lambda ab: _scan(self.z_[ab[0]:ab[1]], qz, self.weights_),
                             zip(bounds[:-1], bounds[1:]))
            return np.concatenate(list(parts))

    def query(self, q, k):
        """Exact ``k`` nearest stored vectors to raw vector ``q``.

        Ties are broken by insertion order. ``k > n`` returns everything.
        """
        if k < 1:
            raise ValueError("k must be at least 1")
        d = self.distances(q)
        order = _top_k(d, k)
        return RankedList([self.ids_[i] for i in order], d[order])

    def to_bytes(self):
        from .persist import dumps

        return dumps(self)

    @classmethod
    def from_bytes(cls, data, n_jobs=1):
        from .persist import loads

        return loads(data, n_jobs=n_jobs)


def _scan(Z, qz, w):
    # row-wise sums, so the result does not depend on shard boundaries
    diff = Z - qz
    return np.sqrt(np.sum(diff * diff * w, axis=1))


def _top_k(d, k):
    """Indices of the ``k`` smallest entries, stable on ties."""
    n = d.size
    if k >= n:
        return np.argsort(d, kind="stable")
    kth = np.partition(d, k - 1)[k - 1]
    cand = np.flatnonzero(d <= kth)
    cand = cand[np.argsort(d[cand], kind="stable")]
    return cand[:k]


def build_index(vectors, ids=None, n_jobs=1):
    """Fit a :class:`SimilarityIndex` on FeatureVectors or an array."""
    return SimilarityIndex(n_jobs=n_jobs).fit(vectors, ids=ids)


def weighted_distance(a, b, w):
    """``sqrt(sum_j w_j (a_j - b_j)^2)``."""
    a = check_vector(a, name="a")
    b = check_vector(b, a.size, "b")
    w = check_vector(w, a.size, "w")
    diff = a - b
    return float(np.sqrt(np.sum(w * diff * diff)))


def query(index, q, k):
    return index.query(q, k)


def update_weights(index, positives, epsilon=DEFAULT_EPSILON):
    """Feedback weights ``w_j ~ 1/(sigma_j + epsilon)``, summing to ``dim``.

    ``sigma_j`` is the population standard deviation of dimension ``j``
    over the positive vectors in z-space.
    """
    ids = list(dict.fromkeys(positives))
    if len(ids) < 2:
        raise TooFewPositives(f"need at least 2 positives, got {len(ids)}")
    rows = np.array([index._pos[i] for i in ids])
    sigma = index.z_[rows].std(axis=0)
    return normalize_weights(1.0 / (sigma + epsilon))
