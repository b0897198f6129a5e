"""Macenko H&E stain estimation and normalization.

Optical density is taken per channel as ``-log10((I + 1) / 256)`` so that
an 8-bit value of 255 maps to zero density. The stain plane is spanned by
the two leading eigenvectors of the tissue-pixel OD covariance; the two
stain directions are the robust angular extremes of the pixel cloud
projected into that plane.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..exceptions import DegenerateStain, EmptyTissue
from .types import Patch, StainReference

MIN_TISSUE_PIXELS = 100


def _pixels(patch):
    return patch.pixels if isinstance(patch, Patch) else Patch(np.asarray(patch)).pixels


def rgb_to_od(pixels):
    return -np.log10((pixels.astype(np.float64) + 1.0) / 256.0)


def od_to_rgb(od):
    return 256.0 * np.power(10.0, -od) - 1.0


def concentrations(od, stain_matrix):
    """Least-squares unmixing of ``(n, 3)`` optical densities into ``(n, 2)``."""
    c, *_ = np.linalg.lstsq(stain_matrix, od.T, rcond=None)
    return c.T


def estimate_stain_reference(patch, beta_od_threshold=0.15, alpha_percentile=1.0,
                             concentration_percentile=99.0):
    """Estimate the H&E basis and reference concentrations of ``patch``.

    Raises
    ------
    EmptyTissue
        Fewer than 100 pixels have any OD channel above the threshold.
    DegenerateStain
        The tissue OD cloud does not span a plane.
    """
    od = rgb_to_od(_pixels(patch)).reshape(-1, 3)
    tissue = od[np.any(od > beta_od_threshold, axis=1)]
    if tissue.shape[0] < MIN_TISSUE_PIXELS:
        raise EmptyTissue(
            f"only {tissue.shape[0]} pixels pass OD threshold {beta_od_threshold}; "
            f"need {MIN_TISSUE_PIXELS}"
        )

    evals, evecs = np.linalg.eigh(np.cov(tissue, rowvar=False))
    # eigh sorts ascending
    evals = evals[::-1]
    plane = evecs[:, ::-1][:, :2].copy()
    if evals[1] <= max(evals[0], 0.0) * 1e-10:
        raise DegenerateStain("optical-density covariance has rank < 2")
    # orient the leading axis into the positive OD octant so angles do not wrap
    if plane[:, 0].sum() < 0:
        plane[:, 0] *= -1
    if plane[:, 1].sum() < 0:
        plane[:, 1] *= -1

    proj = tissue @ plane
    phi = np.arctan2(proj[:, 1], proj[:, 0])
    lo = np.percentile(phi, alpha_percentile)
    hi = np.percentile(phi, 100.0 - alpha_percentile)
    v_lo = plane @ np.array([np.cos(lo), np.sin(lo)])
    v_hi = plane @ np.array([np.cos(hi), np.sin(hi)])
    stains = []
    for v in (v_lo, v_hi):
        if v.sum() < 0:
            v = -v
        stains.append(v / np.linalg.norm(v))
    # hematoxylin absorbs more in the blue channel
    if stains[0][2] >= stains[1][2]:
        h, e = stains
    else:
        e, h = stains
    stain_matrix = np.column_stack([h, e])
    if abs(np.dot(h, e)) > 1.0 - 1e-12:
        raise DegenerateStain("estimated stain directions coincide")

    conc = concentrations(od, stain_matrix)
    max_c = np.percentile(conc, concentration_percentile, axis=0)
    if np.any(max_c <= 0):
        raise DegenerateStain("non-positive reference stain concentration")
    return StainReference(stain_matrix, max_c)


def stain_normalize(patch, source, target):
    """Map ``patch`` from the ``source`` stain appearance onto ``target``.

    Pixels that are black in every channel carry no recoverable stain
    information and are passed through unchanged.
    """
    src = patch if isinstance(patch, Patch) else Patch(np.asarray(patch))
    px = src.pixels
    od = rgb_to_od(px).reshape(-1, 3)
    conc = concentrations(od, source.stain_matrix)
    conc *= target.max_concentrations / source.max_concentrations
    out = od_to_rgb(conc @ target.stain_matrix.T)
    out = np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8).reshape(px.shape)
    out[np.all(px == 0, axis=2)] = 0
    return Patch(out, src.patch_id, src.wsi_id, src.patient_id)


class MacenkoNormalizer(TransformerMixin, BaseEstimator):
    """Fit on a reference image, then map other patches onto its stain appearance.

    Parameters
    ----------
    beta_od_threshold : float, default=0.15
        Pixels with no OD channel above this are treated as background.
    alpha_percentile : float, default=1.0
        Angular percentile used for the robust stain extremes.
    concentration_percentile : float, default=99.0
        Percentile defining the reference maximum concentration.
    """

    def __init__(self, beta_od_threshold=0.15, alpha_percentile=1.0,
                 concentration_percentile=99.0):
        self.beta_od_threshold = beta_od_threshold
        self.alpha_percentile = alpha_percentile
        self.concentration_percentile = concentration_percentile

    def _estimate(self, patch):
        return estimate_stain_reference(
            patch, self.beta_od_threshold, self.alpha_percentile,
            self.concentration_percentile,
        )

    def fit(self, X, y=None):
        self.reference_ = X if isinstance(X, StainReference) else self._estimate(X)
        return self

    def transform(self, X):
        """Normalize one patch (or a list of patches) onto the fitted reference."""
        check_is_fitted(self, "reference_")
        if isinstance(X, (list, tuple)):
            return [self.transform(p) for p in X]
        return stain_normalize(X, self._estimate(X), self.reference_)
