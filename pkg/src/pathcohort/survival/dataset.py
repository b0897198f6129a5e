import warnings
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import EmptySubset, InvalidValue, NonFinite


@dataclass(frozen=True)
class SurvivalDataset:
    """Right-censored survival data with a named covariate matrix.

    ``covariates`` may hold NaN as a missing-value marker (from ingest);
    model fitting requires a complete dataset, see :meth:`complete_cases`.
    """

    times: np.ndarray
    events: np.ndarray
    covariates: np.ndarray
    names: tuple = ()
    ids: tuple = ()
    column_stats: tuple = field(default=None, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64).reshape(-1)
        e = np.asarray(self.events)
        if e.dtype != np.bool_:
            if not np.all(np.isin(e, (0, 1))):
                raise InvalidValue("events must be 0/1 or boolean")
            e = e.astype(bool)
        e = e.reshape(-1)
        X = np.asarray(self.covariates, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size == t.size else X.reshape(t.size, -1)
        if X.size == 0:
            X = X.reshape(t.size, 0)
        if not (t.size == e.size == X.shape[0]):
            raise InvalidValue("times, events and covariates disagree on subject count")
        if not np.all(np.isfinite(t)) or np.any(t <= 0):
            raise InvalidValue("survival times must be finite and positive")
        if np.any(np.isinf(X)):
            raise InvalidValue("covariates must not be infinite")
        names = tuple(self.names) or tuple(f"x{j + 1}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise InvalidValue(f"{len(names)} names for {X.shape[1]} covariates")
        if len(set(names)) != len(names):
            raise InvalidValue("covariate names must be unique")
        ids = tuple(str(i) for i in self.ids) or tuple(str(i) for i in range(t.size))
        if len(ids) != t.size:
            raise InvalidValue("ids length must match subject count")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "events", e)
        object.__setattr__(self, "covariates", X)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "ids", ids)
        if self.column_stats is None:
            with np.errstate(invalid="ignore"), warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                mean = np.nanmean(X, axis=0) if X.shape[0] else np.zeros(X.shape[1])
                std = np.nanstd(X, axis=0) if X.shape[0] else np.ones(X.shape[1])
            std = np.where((std > 0) & np.isfinite(std), std, 1.0)
            object.__setattr__(self, "column_stats", (mean, std))

    def __eq__(self, other):
        if not isinstance(other, SurvivalDataset):
            return NotImplemented
        return (
            (self.names, self.ids) == (other.names, other.ids)
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.events, other.events)
            and np.array_equal(self.covariates, other.covariates, equal_nan=True)
        )

    __hash__ = None

    @property
    def n(self):
        return self.times.size

    @property
    def p(self):
        return self.covariates.shape[1]

    def column(self, name):
        return self.covariates[:, self.names.index(name)]

    def subset(self, mask):
        """Rows selected by a boolean mask or index array."""
        idx = np.arange(self.n)[np.asarray(mask)]
        if idx.size == 0:
            raise EmptySubset("subset selects no subjects")
        return SurvivalDataset(
            self.times[idx], self.events[idx], self.covariates[idx], self.names,
            tuple(self.ids[i] for i in idx),
        )

    def select(self, names):
        cols = [self.names.index(n) for n in names]
        return SurvivalDataset(self.times, self.events, self.covariates[:, cols], tuple(names), self.ids)

    def complete_cases(self):
        """Drop subjects with any missing covariate; returns ``(dataset, dropped_ids)``."""
        ok = ~np.any(np.isnan(self.covariates), axis=1)
        dropped = [self.ids[i] for i in np.flatnonzero(~ok)]
        if ok.all():
            return self, dropped
        return self.subset(ok), dropped

    def require_complete(self):
        if np.any(np.isnan(self.covariates)):
            raise NonFinite("dataset has missing covariate values; use complete_cases() first")
        return self

    def standardized_covariates(self):
        mean, std = self.column_stats
        return (self.covariates - mean) / std
