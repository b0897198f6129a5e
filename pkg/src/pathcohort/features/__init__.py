"""Nucleus-level histology features and Macenko stain normalization."""

from .extract import FeatureConfig, NucleusFeatureExtractor, extract_patch_vector, nucleus_feature_rows
from .intensity import intensity_features, to_gray
from .morphology import morphological_features
from .stain import MacenkoNormalizer, estimate_stain_reference, stain_normalize
from .texture import glcm_features, run_length_features
from .types import (
    FEATURE_COLUMNS,
    FEATURE_NAMES,
    N_FEATURES,
    FeatureVector,
    Patch,
    StainReference,
)

__all__ = [
    "FEATURE_COLUMNS",
    "FEATURE_NAMES",
    "N_FEATURES",
    "FeatureConfig",
    "FeatureVector",
    "MacenkoNormalizer",
    "NucleusFeatureExtractor",
    "Patch",
    "StainReference",
    "estimate_stain_reference",
    "extract_patch_vector",
    "glcm_features",
    "intensity_features",
    "morphological_features",
    "nucleus_feature_rows",
    "run_length_features",
    "stain_normalize",
    "to_gray",
]
