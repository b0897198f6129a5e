"""Second-order texture: co-occurrence and run-length features.

Both use the same four unit offsets (0, 45, 90 and 135 degrees) and the
same per-nucleus min-max quantization. Features are computed per direction
and averaged, so they are unchanged by 90-degree rotation of the input.
"""

import numpy as np

from ..exceptions import NoPairs
from .intensity import to_gray
from .morphology import nucleus_pixels

#: (row, col) steps for 0, 45, 90 and 135 degrees.
OFFSETS = ((0, 1), (-1, 1), (-1, 0), (-1, -1))


def crop_to_region(image, region):
    """Crop ``image`` and ``region`` to the region's bounding box.

    Pairs and runs never leave the region, so texture is unaffected.
    """
    rows, cols = np.nonzero(region)
    sl = (slice(rows.min(), rows.max() + 1), slice(cols.min(), cols.max() + 1))
    return image[sl], region[sl]


def quantize(gray, region, levels=32):
    """Min-max quantize the nucleus pixels into ``levels`` bins (0-based).

    Pixels outside ``region`` are set to -1. A constant nucleus maps to bin 0.
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")
    q = np.full(gray.shape, -1, dtype=np.int64)
    vals = gray[region].astype(np.int64)
    lo, hi = vals.min(), vals.max()
    if hi == lo:
        q[region] = 0
    else:
        # exact integer floor of (v - lo) / (hi - lo) * levels
        q[region] = np.minimum((vals - lo) * levels // (hi - lo), levels - 1)
    return q


def _shifted_pairs(q, dr, dc):
    """Level pairs ``(q[p], q[p + offset])`` where both pixels are in the region."""
    h, w = q.shape
    r0, r1 = max(0, -dr), min(h, h - dr)
    c0, c1 = max(0, -dc), min(w, w - dc)
    a = q[r0:r1, c0:c1]
    b = q[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
    keep = (a >= 0) & (b >= 0)
    return a[keep], b[keep]


def cooccurrence(q, offset, levels):
    """Symmetric normalized co-occurrence matrix, or None if there are no pairs."""
    a, b = _shifted_pairs(q, *offset)
    if a.size == 0:
        return None
    P = np.zeros((levels, levels), dtype=np.float64)
    np.add.at(P, (a, b), 1.0)
    np.add.at(P, (b, a), 1.0)
    return P / P.sum()


def glcm_statistics(P):
    """The eight co-occurrence statistics of a normalized matrix ``P``."""
    n = P.shape[0]
    i, j = np.meshgrid(np.arange(n, dtype=np.float64), np.arange(n, dtype=np.float64), indexing="ij")
    px, py = P.sum(axis=1), P.sum(axis=0)
    lv = np.arange(n, dtype=np.float64)
    mu_x, mu_y = px @ lv, py @ lv
    sd_x = np.sqrt(px @ (lv - mu_x) ** 2)
    sd_y = np.sqrt(py @ (lv - mu_y) ** 2)

    nz = P > 0
    energy = np.sum(P ** 2)
    entropy = -np.sum(P[nz] * np.log(P[nz]))
    inertia = np.sum((i - j) ** 2 * P)
    idm = np.sum(P / (1.0 + (i - j) ** 2))
    s = i + j - mu_x - mu_y
    shade = np.sum(s ** 3 * P)
    prominence = np.sum(s ** 4 * P)
    if sd_x * sd_y > 0:
        corr = np.sum((i - mu_x) * (j - mu_y) * P) / (sd_x * sd_y)
        h_corr = (np.sum(i * j * P) - mu_x * mu_y) / (sd_x * sd_y)
    else:
        # single occupied level: perfectly (trivially) correlated
        corr = h_corr = 1.0
    return np.array([energy, entropy, corr, idm, inertia, shade, prominence, h_corr])


def glcm_features(patch, mask, nucleus_id, levels=32):
    """Direction-averaged co-occurrence features of one nucleus.

    Offsets with no in-mask pair are left out of the average.

    Raises
    ------
    NoPairs
        No pair of 8-adjacent pixels lies inside the nucleus.
    """
    region = nucleus_pixels(mask, nucleus_id)
    gray, region = crop_to_region(to_gray(patch), region)
    return glcm_region_features(gray, region, levels, nucleus_id)


def glcm_region_features(gray, region, levels=32, nucleus_id=None):
    q = quantize(gray, region, levels)
    rows = [glcm_statistics(P) for P in (cooccurrence(q, o, levels) for o in OFFSETS) if P is not None]
    if not rows:
        raise NoPairs(f"nucleus {nucleus_id} has no co-occurring pixel pairs")
    return np.mean(rows, axis=0)


def _runs_along(q, dr, dc):
    """Yield (level, length) for maximal constant runs along direction ``(dr, dc)``."""
    h, w = q.shape
    # each line starts at a pixel whose predecessor lies outside the image
    starts = []
    for r in range(h):
        for c in range(w):
            pr, pc = r - dr, c - dc
            if not (0 <= pr < h and 0 <= pc < w):
                starts.append((r, c))
    for r, c in starts:
        level, length = -1, 0
        while 0 <= r < h and 0 <= c < w:
            v = q[r, c]
            if v == level and v >= 0:
                length += 1
            else:
                if level >= 0:
                    yield level, length
                level, length = v, 1
            r += dr
            c += dc
        if level >= 0:
            yield level, length


def run_length_matrix(q, direction, levels):
    runs = list(_runs_along(q, *direction))
    max_len = max(length for _, length in runs)
    R = np.zeros((levels, max_len), dtype=np.float64)
    for level, length in runs:
        R[level, length - 1] += 1.0
    return R


def run_length_statistics(R):
    """The eight run-length emphases of a count matrix ``R``.

    Gray levels are 1-based here so the low-gray emphases stay finite.
    """
    n_runs = R.sum()
    g = np.arange(1, R.shape[0] + 1, dtype=np.float64)[:, None]
    ell = np.arange(1, R.shape[1] + 1, dtype=np.float64)[None, :]
    g2, l2 = g ** 2, ell ** 2
    return np.array([
        np.sum(R.sum(axis=1) ** 2) / n_runs,
        np.sum(R.sum(axis=0) ** 2) / n_runs,
        np.sum(R / g2) / n_runs,
        np.sum(R * g2) / n_runs,
        np.sum(R / (g2 * l2)) / n_runs,
        np.sum(R * g2 / l2) / n_runs,
        np.sum(R * l2 / g2) / n_runs,
        np.sum(R * g2 * l2) / n_runs,
    ])


def run_length_features(patch, mask, nucleus_id, levels=32):
    region = nucleus_pixels(mask, nucleus_id)
    gray, region = crop_to_region(to_gray(patch), region)
    return run_length_region_features(gray, region, levels)


def run_length_region_features(gray, region, levels=32):
    q = quantize(gray, region, levels)
    return np.mean([run_length_statistics(run_length_matrix(q, d, levels)) for d in OFFSETS], axis=0)
