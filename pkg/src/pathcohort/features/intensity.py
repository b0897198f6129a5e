import numpy as np

from .morphology import nucleus_pixels
from .types import Patch


def to_gray(pixels):
    """ITU-R 601 luma, rounded half-up to 8-bit integers."""
    px = pixels.pixels if isinstance(pixels, Patch) else np.asarray(pixels)
    px = px.astype(np.float64)
    gray = 0.299 * px[..., 0] + 0.587 * px[..., 1] + 0.114 * px[..., 2]
    return np.floor(gray + 0.5).astype(np.int64)


def moments(values):
    """Mean, median, population std, skewness and excess kurtosis."""
    v = np.asarray(values, dtype=np.float64)
    mean = v.mean()
    d = v - mean
    m2 = np.mean(d ** 2)
    if m2 == 0.0:
        skew = kurt = 0.0
    else:
        skew = np.mean(d ** 3) / m2 ** 1.5
        kurt = np.mean(d ** 4) / m2 ** 2 - 3.0
    return np.array([mean, np.median(v), np.sqrt(m2), skew, kurt])


def intensity_features(patch, mask, nucleus_id):
    gray = to_gray(patch)
    region = nucleus_pixels(mask, nucleus_id)
    return moments(gray[region])
