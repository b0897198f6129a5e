"""Per-nucleus feature rows and their aggregation into one patch vector."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .._validation import check_mask
from ..exceptions import NoPairs, NoValidNuclei
from .intensity import moments, to_gray
from .morphology import region_morphology
from .texture import crop_to_region, glcm_region_features, run_length_region_features
from .types import N_FEATURES, FeatureVector, Patch


@dataclass(frozen=True)
class FeatureConfig:
    levels: int = 32
    aggregate: str = "mean"
    min_nucleus_pixels: int = 4

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("levels must be >= 2")
        if self.aggregate not in ("mean", "median"):
            raise ValueError(f"aggregate must be 'mean' or 'median', got {self.aggregate!r}")


def nucleus_feature_rows(patch, mask, config=None):
    """31-feature rows for every usable nucleus of ``patch``.

    Nuclei smaller than ``config.min_nucleus_pixels`` and nuclei with no
    co-occurring pixel pair are skipped.

    Returns
    -------
    ids : list of int
    rows : ndarray of shape (n_nuclei, 31)
    """
    config = config or FeatureConfig()
    patch = patch if isinstance(patch, Patch) else Patch(np.asarray(patch))
    mask = check_mask(mask, patch.pixels.shape[:2])
    gray = to_gray(patch)

    labels, counts = np.unique(mask[mask > 0], return_counts=True)
    ids, rows = [], []
    for label, count in zip(labels, counts):
        if count < config.min_nucleus_pixels:
            continue
        g, region = crop_to_region(gray, mask == label)
        try:
            glcm = glcm_region_features(g, region, config.levels, int(label))
        except NoPairs:
            continue
        rows.append(np.concatenate([
            region_morphology(region),
            moments(g[region]),
            glcm,
            run_length_region_features(g, region, config.levels),
        ]))
        ids.append(int(label))
    return ids, np.asarray(rows, dtype=np.float64).reshape(-1, N_FEATURES)


def extract_patch_vector(patch, mask, config=None):
    """Aggregate the nuclei of one patch into a single 31-dimensional vector.

    Raises
    ------
    NoValidNuclei
        Every nucleus was too small or had no co-occurring pixel pair.
    """
    config = config or FeatureConfig()
    patch = patch if isinstance(patch, Patch) else Patch(np.asarray(patch))
    _, rows = nucleus_feature_rows(patch, mask, config)
    if rows.shape[0] == 0:
        raise NoValidNuclei(f"patch {patch.patch_id!r} has no nucleus usable for texture features")
    agg = np.median(rows, axis=0) if config.aggregate == "median" else rows.mean(axis=0)
    return FeatureVector(patch.patch_id, patch.wsi_id, patch.patient_id, agg)


class NucleusFeatureExtractor(TransformerMixin, BaseEstimator):
    """Transform ``(patch, mask)`` pairs into an ``(n_patches, 31)`` matrix.

    Stateless; ``fit`` only validates parameters. Pass a fitted
    :class:`~pathcohort.features.stain.MacenkoNormalizer` as ``normalizer``
    to stain-normalize each patch first.
    """

    def __init__(self, levels=32, aggregate="mean", min_nucleus_pixels=4, normalizer=None):
        self.levels = levels
        self.aggregate = aggregate
        self.min_nucleus_pixels = min_nucleus_pixels
        self.normalizer = normalizer

    def _config(self):
        return FeatureConfig(self.levels, self.aggregate, self.min_nucleus_pixels)

    def fit(self, X=None, y=None):
        self._config()
        return self

    def transform_vectors(self, X):
        config = self._config()
        out = []
        for patch, mask in X:
            if self.normalizer is not None:
                patch = self.normalizer.transform(patch)
            out.append(extract_patch_vector(patch, mask, config))
        return out

    def transform(self, X):
        vecs = self.transform_vectors(X)
        return np.vstack([v.values for v in vecs]) if vecs else np.empty((0, N_FEATURES))
