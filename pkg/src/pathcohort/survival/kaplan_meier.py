from dataclasses import dataclass

import numpy as np

from ..exceptions import EmptySubset


@dataclass(frozen=True)
class SurvivalCurve:
    """Product-limit estimate listed at the distinct event times."""

    event_times: np.ndarray
    survival: np.ndarray
    at_risk: np.ndarray
    n_events: np.ndarray
    greenwood_var: np.ndarray

    def __len__(self):
        return self.event_times.size

    def at(self, t):
        """S(t) as a right-continuous step function."""
        k = np.searchsorted(self.event_times, t, side="right")
        return 1.0 if k == 0 else float(self.survival[k - 1])

    def to_csv(self):
        lines = ["time,survival,at_risk,events,greenwood_var"]
        for row in zip(self.event_times, self.survival, self.at_risk, self.n_events, self.greenwood_var):
            t, s, n, d, v = row
            lines.append(f"{t:.12g},{s:.12g},{int(n)},{int(d)},{v:.12g}")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "time": self.event_times.tolist(),
            "survival": self.survival.tolist(),
            "at_risk": self.at_risk.astype(int).tolist(),
            "events": self.n_events.astype(int).tolist(),
            "greenwood_var": self.greenwood_var.tolist(),
        }


def risk_table(times, events):
    """Distinct event times with their risk-set sizes and event counts.

    Subjects censored at an event time are counted at risk for it.
    """
    times = np.asarray(times, dtype=np.float64)
    events = np.asarray(events, dtype=bool)
    ev_times = np.unique(times[events])
    sorted_t = np.sort(times)
    at_risk = sorted_t.size - np.searchsorted(sorted_t, ev_times, side="left")
    d = np.array([np.count_nonzero(times[events] == t) for t in ev_times], dtype=np.int64)
    return ev_times, at_risk.astype(np.int64), d


def kaplan_meier(times, events):
    if np.asarray(times).size == 0:
        raise EmptySubset("no subjects to estimate survival from")
    t, n, d = risk_table(times, events)
    nf, df = n.astype(np.float64), d.astype(np.float64)
    surv = np.cumprod(1.0 - df / nf)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(n > d, df / (nf * (nf - df)), 0.0)
    # past a step to zero the variance is zero, not undefined
    var = np.where(surv > 0, surv ** 2 * np.cumsum(terms), 0.0)
    return SurvivalCurve(t, surv, n, d, var)


def km_estimate(ds, subset=None):
    """Kaplan-Meier curve of ``ds`` restricted to the boolean ``subset``."""
    if subset is None:
        return kaplan_meier(ds.times, ds.events)
    subset = np.asarray(subset, dtype=bool)
    if not subset.any():
        raise EmptySubset("subset selects no subjects")
    return kaplan_meier(ds.times[subset], ds.events[subset])
