"""Query patient -> similar cohort -> cohort survival model -> personal weights."""

import difflib
import hashlib
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import INDEX_FORMAT_VERSION, __version__
from ..exceptions import (
    CohortTooSmall,
    Degenerate,
    FitFailed,
    MissingRecords,
    PathCohortError,
    UnknownPatient,
)
from ..index import feedback_search, fuse_rankings, resolve_cohort
from ..survival import cox_fit, hazard_ratios, km_estimate, median_split, risk_index, univariate_screen


@dataclass(frozen=True)
class PersonalizeConfig:
    """Settings for :func:`personalize`.

    ``lam`` is the L1 penalty (``0`` for the plain Cox model, ``"cv"`` to
    cross-validate it with ``seed``). ``cox_max_iter=None`` keeps the fitter's
    own defaults. ``factors`` restricts the model to named record columns.
    """

    k: int = 500
    m_positives: int = 50
    max_rounds: int = 10
    tol: float = 1e-3
    epsilon: float = 1e-6
    lam: object = 0.0
    cox_max_iter: int = None
    cox_tol: float = 1e-9
    min_cohort: int = 30
    alpha: float = 0.05
    seed: int = 0
    factors: tuple = ()

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.m_positives < 2:
            raise ValueError("m_positives must be at least 2")
        if self.max_rounds < 0:
            raise ValueError("max_rounds must be non-negative")
        for name in ("tol", "epsilon", "cox_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.min_cohort < 2:
            raise ValueError("min_cohort must be at least 2")
        if not (self.lam == "cv" or (isinstance(self.lam, (int, float)) and self.lam >= 0)):
            raise ValueError("lam must be a non-negative number or 'cv'")
        object.__setattr__(self, "factors", tuple(self.factors))

    def to_dict(self):
        d = asdict(self)
        d["factors"] = list(self.factors)
        return d


@dataclass
class PersonalizedReport:
    patient_id: str
    cohort_size: int
    factor_weights: list
    risk_index: float
    risk_group: str
    km_low: object
    km_high: object
    screen: list
    provenance: dict
    cohort: list = field(default_factory=list)
    hazard_ratios: list = field(default_factory=list)
    fit: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    status: str = "ok"

    @property
    def weights(self):
        return dict(self.factor_weights)

    def top_factor(self):
        """Factor with the largest absolute weight."""
        if not self.factor_weights:
            return None
        return max(self.factor_weights, key=lambda fw: (abs(fw[1]), fw[0]))[0]


def suggest_patients(patient_id, known, n=3):
    return difflib.get_close_matches(str(patient_id), sorted(known), n=n, cutoff=0.0)


def index_digest(index):
    return hashlib.sha256(index.to_bytes()).hexdigest()


def query_patches(patient_id, index, lineage):
    indexed = set(index.ids_)
    patches = [pid for pid, (_, p) in lineage.items() if p == patient_id and pid in indexed]
    if not patches:
        known = {p for pid, (_, p) in lineage.items() if pid in indexed}
        raise UnknownPatient(patient_id, suggest_patients(patient_id, known))
    return patches


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def personalize(patient_id, index, lineage, records, config=None):
    """Personalized prognostic-factor weights for one patient.

    Every patch of the patient drives a relevance-feedback search; the
    rankings are fused, cut to ``k`` and resolved to patients, leaving out
    the query patient. A Cox model fitted on that cohort's records gives
    the weights (standardized coefficients), and the patient's own record
    is scored under it.

    Raises
    ------
    UnknownPatient
        No indexed patch belongs to ``patient_id``.
    MissingRecords
        The query patient has no complete record.
    CohortTooSmall
        Fewer than ``min_cohort`` cohort patients with complete records.
    FitFailed
        The cohort fit raised; ``.partial`` carries the report so far.
    """
    cfg = config or PersonalizeConfig()
    patches = query_patches(patient_id, index, lineage)
    ds_all = records.select(cfg.factors) if cfg.factors else records
    ds_all, incomplete = ds_all.complete_cases()
    pos = {pid: i for i, pid in enumerate(ds_all.ids)}
    if patient_id not in pos:
        raise MissingRecords([patient_id])

    rankings, rounds = [], []
    for pid in patches:
        ranked, state = feedback_search(
            index, index.vector(pid, z=False), cfg.k, cfg.m_positives, cfg.max_rounds,
            cfg.tol, cfg.epsilon)
        rankings.append(ranked)
        rounds.append({"patch_id": pid, "rounds": state.round, "converged": state.converged})
    fused = fuse_rankings(rankings, cfg.k)
    cohort = resolve_cohort(fused, lineage, exclude_patients={patient_id})

    members = [p for p in cohort.patient_ids if p in pos]
    no_record = [p for p in cohort.patient_ids if p not in pos and p not in set(incomplete)]
    dropped = [p for p in cohort.patient_ids if p in set(incomplete)]
    if len(members) < cfg.min_cohort:
        raise CohortTooSmall(len(members), cfg.min_cohort)
    ds = ds_all.subset(np.array([pos[p] for p in members]))
    x_query = ds_all.covariates[pos[patient_id]]

    provenance = {
        "package_version": __version__,
        "index_format_version": INDEX_FORMAT_VERSION,
        "index_sha256": index_digest(index),
        "seed": int(cfg.seed),
        "config": cfg.to_dict(),
        "query_patches": rounds,
        "fused_patches": len(fused),
        "cohort_patients": len(cohort),
        "dropped_incomplete": dropped,
        "dropped_no_record": no_record,
    }
    support = dict(zip(cohort.patient_ids, cohort.support))
    cohort_rows = [{"patient_id": p, "support": support[p]} for p in members]

    screen = univariate_screen(ds, cfg.alpha)
    report = PersonalizedReport(
        patient_id=patient_id, cohort_size=ds.n, factor_weights=[], risk_index=math.nan,
        risk_group=None, km_low=None, km_high=None, screen=screen, provenance=provenance,
        cohort=cohort_rows,
    )

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            fit = cox_fit(ds, cfg.lam, max_iter=cfg.cox_max_iter, tol=cfg.cox_tol, seed=cfg.seed)
        except PathCohortError as exc:
            report.status = "fit_failed"
            report.warnings.append(str(exc))
            raise FitFailed(f"cohort Cox fit failed: {exc}", partial=report) from exc
    report.warnings.extend(str(w.message) for w in caught)

    report.factor_weights = sorted(
        ((name, float(b)) for name, b in zip(fit.names, fit.beta)), key=lambda fw: (fw[1], fw[0]))
    report.hazard_ratios = hazard_ratios(fit, strict=False)
    report.fit = {
        "loglik": _finite(fit.loglik),
        "converged": bool(fit.converged),
        "iterations": int(fit.iterations),
        "lambda": _finite(fit.penalty),
        "method": fit.method,
        "separation": bool(fit.separation),
    }
    if fit.cv is not None:
        report.fit["cv"] = {"lambda": fit.cv["lambda"], "seed": fit.cv["seed"], "n_folds": fit.cv["n_folds"]}

    cohort_risk = risk_index(fit, ds.covariates)
    report.risk_index = float(risk_index(fit, x_query))
    try:
        low, high, cut = median_split(cohort_risk)
    except Degenerate:
        low, high, cut = np.ones(ds.n, bool), np.zeros(ds.n, bool), float(cohort_risk[0])
    report.provenance["risk_cut"] = float(cut)
    report.risk_group = "high" if report.risk_index > cut else "low"
    report.km_low = km_estimate(ds, low)
    report.km_high = km_estimate(ds, high) if high.any() else None
    return report
