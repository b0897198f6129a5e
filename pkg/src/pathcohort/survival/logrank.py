from dataclasses import dataclass

import numpy as np

from ..exceptions import EmptyGroup
from .special import chi2_sf


@dataclass(frozen=True)
class LogRankResult:
    chi2: float
    p_value: float
    observed_a: float
    expected_a: float
    variance: float
    no_events: bool = False

    def __iter__(self):
        # allows ``chi2, p = logrank_test(...)``
        return iter((self.chi2, self.p_value))


def logrank(times_a, events_a, times_b, events_b):
    """Two-sample log-rank test on raw arrays."""
    times_a, times_b = np.asarray(times_a, float), np.asarray(times_b, float)
    events_a, events_b = np.asarray(events_a, bool), np.asarray(events_b, bool)
    if times_a.size == 0 or times_b.size == 0:
        raise EmptyGroup("both groups need at least one subject")
    all_t = np.concatenate([times_a, times_b])
    all_e = np.concatenate([events_a, events_b])
    ev_times = np.unique(all_t[all_e])
    if ev_times.size == 0:
        return LogRankResult(0.0, 1.0, 0.0, 0.0, 0.0, no_events=True)

    sa, sb = np.sort(times_a), np.sort(times_b)
    n_a = (sa.size - np.searchsorted(sa, ev_times, side="left")).astype(float)
    n_b = (sb.size - np.searchsorted(sb, ev_times, side="left")).astype(float)
    ea_t = np.sort(times_a[events_a])
    eb_t = np.sort(times_b[events_b])
    d_a = (np.searchsorted(ea_t, ev_times, "right") - np.searchsorted(ea_t, ev_times, "left")).astype(float)
    d_b = (np.searchsorted(eb_t, ev_times, "right") - np.searchsorted(eb_t, ev_times, "left")).astype(float)

    n = n_a + n_b
    d = d_a + d_b
    expected = d * n_a / n
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(n > 1, d * (n_a * n_b) * (n - d) / (n * n * (n - 1.0)), 0.0)
    O, E, V = float(d_a.sum()), float(expected.sum()), float(v.sum())
    if V <= 0.0:
        return LogRankResult(0.0, 1.0, O, E, V, no_events=False)
    chi2 = (O - E) ** 2 / V
    return LogRankResult(chi2, chi2_sf(chi2, 1), O, E, V)


def logrank_test(ds, group_a, group_b):
    """Log-rank comparison of two disjoint boolean subject masks of ``ds``."""
    group_a = np.asarray(group_a, dtype=bool)
    group_b = np.asarray(group_b, dtype=bool)
    if not group_a.any() or not group_b.any():
        raise EmptyGroup("both groups need at least one subject")
    if np.any(group_a & group_b):
        raise ValueError("groups must be disjoint")
    return logrank(ds.times[group_a], ds.events[group_a], ds.times[group_b], ds.events[group_b])
