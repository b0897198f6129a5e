"""Kaplan-Meier, log-rank, Cox and Lasso-Cox survival analysis."""

from .cox import (
    BaselineHazard,
    CoxFit,
    CoxPH,
    HazardRatio,
    PartialLikelihood,
    baseline_hazard,
    cox_fit,
    cox_gradient,
    cox_loglik,
    hazard_ratios,
    risk_index,
    select_lambda_cv,
)
from .dataset import SurvivalDataset
from .kaplan_meier import SurvivalCurve, kaplan_meier, km_estimate
from .logrank import LogRankResult, logrank, logrank_test
from .screen import FactorScreenRow, median_split, univariate_screen
from .special import chi2_sf, gammaincc

__all__ = [
    "BaselineHazard",
    "CoxFit",
    "CoxPH",
    "FactorScreenRow",
    "HazardRatio",
    "LogRankResult",
    "PartialLikelihood",
    "SurvivalCurve",
    "SurvivalDataset",
    "baseline_hazard",
    "chi2_sf",
    "cox_fit",
    "cox_gradient",
    "cox_loglik",
    "gammaincc",
    "hazard_ratios",
    "kaplan_meier",
    "km_estimate",
    "logrank",
    "logrank_test",
    "median_split",
    "risk_index",
    "select_lambda_cv",
    "univariate_screen",
]
