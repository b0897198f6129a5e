"""Personalized cohort survival analysis and synthetic cohorts."""

from .pipeline import PersonalizeConfig, PersonalizedReport, personalize, query_patches
from .report import REPORT_FORMAT, load_report_schema, render_report, report_dict
from .simulate import (
    ClusterSpec,
    SimulatedCohort,
    SimulationSpec,
    calibrate_censoring,
    default_clusters,
    simulate_cohort,
    spec_from_config,
)

__all__ = [
    "ClusterSpec",
    "PersonalizeConfig",
    "PersonalizedReport",
    "REPORT_FORMAT",
    "SimulatedCohort",
    "SimulationSpec",
    "calibrate_censoring",
    "default_clusters",
    "load_report_schema",
    "personalize",
    "query_patches",
    "render_report",
    "report_dict",
    "simulate_cohort",
    "spec_from_config",
]
