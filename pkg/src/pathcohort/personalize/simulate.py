"""Synthetic cohorts with planted survival effects and clustered patch features.

Patients are assigned to clusters round-robin. Each cluster has a
feature center (where its patches sit in feature space) and a shift
for the prognostic factors. Survival times follow an exponential
proportional-hazards model, ``T = -ln U / (rate * exp(beta . x))``, and
censoring times are uniform on ``[0, c_max]`` with ``c_max`` solved so
the expected censored fraction equals the target.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import SpecInvalid
from ..features.types import N_FEATURES, FeatureVector
from ..ingest.schema import continuous_schema
from ..ingest.tables import write_features, write_lineage, write_records
from ..survival.dataset import SurvivalDataset


@dataclass(frozen=True)
class ClusterSpec:
    """Feature center and spread for one patient cluster.

    ``factor_shift`` moves the mean of the prognostic factors for the
    cluster's patients (zero by default).
    """

    center: tuple
    sigma: float = 0.1
    factor_shift: tuple = ()


@dataclass(frozen=True)
class SimulationSpec:
    """Parameters of a synthetic cohort.

    Parameters
    ----------
    n : int
        Patients.
    true_beta : sequence of float
        Log-hazard ratio per prognostic factor (factors are N(shift, 1)).
    baseline_rate : float
        Events per day at ``x = 0``.
    censor_fraction : float
        Target share of censored patients, in ``[0, 1)``.
    feature_cluster_spec : tuple of ClusterSpec, optional
        Defaults to :func:`default_clusters` with 3 clusters.
    seed : int
    wsis_per_patient, patches_per_wsi : int
    factor_names : tuple of str, optional
        Defaults to ``factor_1 .. factor_p``.
    """

    n: int
    true_beta: tuple
    baseline_rate: float = 0.001
    censor_fraction: float = 0.2
    feature_cluster_spec: tuple = ()
    seed: int = 0
    wsis_per_patient: int = 2
    patches_per_wsi: int = 2
    factor_names: tuple = ()

    def __post_init__(self):
        beta = tuple(float(b) for b in np.atleast_1d(self.true_beta))
        object.__setattr__(self, "true_beta", beta)
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise SpecInvalid(f"n must be an integer >= 2, got {self.n!r}")
        if not beta or not all(math.isfinite(b) for b in beta):
            raise SpecInvalid("true_beta must be a non-empty vector of finite reals")
        if not (self.baseline_rate > 0 and math.isfinite(self.baseline_rate)):
            raise SpecInvalid("baseline_rate must be positive")
        if not 0 <= self.censor_fraction < 1:
            raise SpecInvalid("censor_fraction must lie in [0, 1)")
        if self.wsis_per_patient < 1 or self.patches_per_wsi < 1:
            raise SpecInvalid("each patient needs at least one WSI and one patch")
        if not 0 <= int(self.seed) < 2**64:
            raise SpecInvalid("seed must fit in an unsigned 64-bit integer")
        names = tuple(self.factor_names) or tuple(f"factor_{j + 1}" for j in range(len(beta)))
        if len(names) != len(beta) or len(set(names)) != len(names):
            raise SpecInvalid("factor_names must be unique and match true_beta in length")
        object.__setattr__(self, "factor_names", names)
        clusters = tuple(self.feature_cluster_spec) or default_clusters(3, seed=self.seed)
        for c in clusters:
            if len(c.center) != N_FEATURES:
                raise SpecInvalid(f"cluster centers must have {N_FEATURES} entries")
            if not c.sigma > 0:
                raise SpecInvalid("cluster sigma must be positive")
            if c.factor_shift and len(c.factor_shift) != len(beta):
                raise SpecInvalid("factor_shift must match true_beta in length")
        object.__setattr__(self, "feature_cluster_spec", clusters)

    @property
    def p(self):
        return len(self.true_beta)


def default_clusters(k=3, separation=10.0, sigma=0.1, seed=0, dim=N_FEATURES):
    """``k`` clusters at mutually orthogonal centers ``separation`` apart."""
    if k < 1 or k > dim:
        raise SpecInvalid(f"cluster count must be in 1..{dim}")
    rng = np.random.default_rng([int(seed), 0x5EED])
    basis, _ = np.linalg.qr(rng.standard_normal((dim, k)))
    centers = basis.T * (separation / math.sqrt(2.0))
    return tuple(ClusterSpec(tuple(float(x) for x in c), float(sigma)) for c in centers)


def calibrate_censoring(times, fraction):
    """Upper bound ``c`` of uniform censoring with mean ``P(C < T)`` = ``fraction``.

    For ``C ~ U(0, c)`` a subject with time ``t`` is censored with
    probability ``min(t / c, 1)``, which falls monotonically in ``c``;
    the root is found by bisection on a log scale.
    """
    t = np.asarray(times, dtype=np.float64)
    if fraction <= 0:
        return math.inf

    def censored(c):
        return float(np.mean(np.minimum(t / c, 1.0)))

    lo, hi = t.min() * 1e-6, t.max()
    while censored(hi) > fraction:
        hi *= 2.0
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if censored(mid) > fraction:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1.0 < 1e-13:
            break
    return hi


@dataclass
class SimulatedCohort:
    features: list
    records: SurvivalDataset
    lineage: dict
    clusters: np.ndarray
    spec: SimulationSpec = field(repr=False)

    @property
    def schema(self):
        return continuous_schema(self.records.names)

    def patient_cluster(self, patient_id):
        return int(self.clusters[self.records.ids.index(patient_id)])

    def write(self, out_dir):
        """Write ``features.csv``, ``records.csv``, ``lineage.csv`` and ``schema.ini``."""
        os.makedirs(out_dir, exist_ok=True)
        write_features(os.path.join(out_dir, "features.csv"), self.features)
        write_records(os.path.join(out_dir, "records.csv"), self.records, self.schema)
        write_lineage(os.path.join(out_dir, "lineage.csv"), self.lineage)
        with open(os.path.join(out_dir, "schema.ini"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.schema.to_ini())
        return [os.path.join(out_dir, f) for f in ("features.csv", "records.csv", "lineage.csv", "schema.ini")]


def simulate_cohort(spec):
    """Draw a cohort from ``spec``; identical specs give identical cohorts."""
    rng = np.random.default_rng(int(spec.seed))
    n, p = spec.n, spec.p
    clusters = spec.feature_cluster_spec
    assign = np.arange(n) % len(clusters)
    shifts = np.array([c.factor_shift or (0.0,) * p for c in clusters], dtype=np.float64)

    X = rng.standard_normal((n, p)) + shifts[assign]
    eta = X @ np.asarray(spec.true_beta)
    # U on [tiny, 1) keeps every time strictly positive and finite
    U = rng.uniform(np.finfo(np.float64).tiny, 1.0, n)
    T = -np.log(U) / (spec.baseline_rate * np.exp(eta))
    c_max = calibrate_censoring(T, spec.censor_fraction)
    if math.isinf(c_max):
        times, events = T, np.ones(n, dtype=bool)
    else:
        C = rng.uniform(np.finfo(np.float64).tiny, c_max, n)
        times, events = np.minimum(T, C), T <= C

    width = len(str(n - 1))
    ids = [f"P{i:0{width}d}" for i in range(n)]
    features, lineage = [], {}
    for i, pid in enumerate(ids):
        c = clusters[assign[i]]
        center = np.asarray(c.center)
        for w in range(spec.wsis_per_patient):
            wsi = f"{pid}-W{w}"
            for k in range(spec.patches_per_wsi):
                patch = f"{wsi}-{k}"
                values = center + c.sigma * rng.standard_normal(N_FEATURES)
                features.append(FeatureVector(patch, wsi, pid, values))
                lineage[patch] = (wsi, pid)
    records = SurvivalDataset(times, events, X, spec.factor_names, ids)
    return SimulatedCohort(features, records, lineage, assign, spec)


def spec_from_config(cfg):
    """Build a :class:`SimulationSpec` from flat ``key = value`` settings.

    Recognized keys: ``n``, ``true_beta`` (comma list), ``baseline_rate``,
    ``censor_fraction``, ``seed``, ``clusters``, ``cluster_separation``,
    ``cluster_sigma``, ``wsis_per_patient``, ``patches_per_wsi``,
    ``factor_names`` (comma list).
    """
    known = {"n", "true_beta", "baseline_rate", "censor_fraction", "seed", "clusters",
             "cluster_separation", "cluster_sigma", "wsis_per_patient", "patches_per_wsi",
             "factor_names"}
    unknown = set(cfg) - known
    if unknown:
        raise SpecInvalid(f"unknown simulation keys: {', '.join(sorted(unknown))}")
    try:
        seed = int(cfg.get("seed", 0))
        beta = tuple(float(b) for b in str(cfg.get("true_beta", "1.0")).split(","))
        clusters = default_clusters(
            int(cfg.get("clusters", 3)), float(cfg.get("cluster_separation", 10.0)),
            float(cfg.get("cluster_sigma", 0.1)), seed)
        names = tuple(s.strip() for s in str(cfg.get("factor_names", "")).split(",") if s.strip())
        return SimulationSpec(
            n=int(cfg.get("n", 300)), true_beta=beta,
            baseline_rate=float(cfg.get("baseline_rate", 0.001)),
            censor_fraction=float(cfg.get("censor_fraction", 0.2)),
            feature_cluster_spec=clusters, seed=seed,
            wsis_per_patient=int(cfg.get("wsis_per_patient", 2)),
            patches_per_wsi=int(cfg.get("patches_per_wsi", 2)),
            factor_names=names,
        )
    except ValueError as exc:
        if isinstance(exc, SpecInvalid):
            raise
        raise SpecInvalid(str(exc)) from exc


__all__ = [
    "ClusterSpec",
    "SimulatedCohort",
    "SimulationSpec",
    "calibrate_censoring",
    "default_clusters",
    "simulate_cohort",
    "spec_from_config",
]
