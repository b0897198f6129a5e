import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..exceptions import Degenerate, PathCohortError
from .cox import cox_fit
from .logrank import logrank_test


@dataclass(frozen=True)
class FactorScreenRow:
    """One factor's median-split log-rank result.

    ``direction`` is ``"P"`` when higher values go with better survival
    (negative univariate Cox coefficient) and ``"N"`` otherwise. Skipped
    factors carry ``logrank_p = nan`` and ``direction = None``.
    """

    factor_name: str
    logrank_p: float
    direction: str
    median_cut: float
    chi2: float = math.nan
    significant: bool = False
    skipped: bool = False

    def to_dict(self):
        fin = lambda x: x if math.isfinite(x) else None  # noqa: E731
        return {
            "factor": self.factor_name,
            "logrank_p": fin(self.logrank_p),
            "direction": self.direction,
            "median_cut": fin(self.median_cut),
            "chi2": fin(self.chi2),
            "significant": self.significant,
            "skipped": self.skipped,
        }


def median_split(values):
    """Split at the lower median: ``<= cut`` is low, ``> cut`` is high.

    Raises
    ------
    Degenerate
        One side would be empty.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise Degenerate("no values to split")
    cut = float(np.sort(v)[(v.size - 1) // 2])
    low = v <= cut
    if low.all():
        raise Degenerate(f"all values are <= the median {cut}")
    return low, ~low, cut


def univariate_screen(ds, alpha=0.05):
    """Median-split log-rank screen of every covariate of ``ds``."""
    rows = []
    for j, name in enumerate(ds.names):
        x = ds.covariates[:, j]
        try:
            low, high, cut = median_split(x)
        except Degenerate:
            rows.append(FactorScreenRow(name, math.nan, None, math.nan, skipped=True))
            continue
        res = logrank_test(ds, high, low)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                beta = cox_fit(ds.select([name])).beta[0]
        except PathCohortError:
            beta = 0.0
        direction = "P" if beta < 0 else "N"
        rows.append(FactorScreenRow(
            name, res.p_value, direction, cut, res.chi2, bool(res.p_value < alpha)))
    return rows
