from dataclasses import dataclass, field

import numpy as np

from ..exceptions import InvalidValue

MORPHOLOGY_NAMES = (
    "area",
    "perimeter",
    "equivalent_diameter",
    "major_axis_len",
    "minor_axis_len",
    "eccentricity",
    "solidity",
    "extent",
    "circularity",
    "aspect_ratio",
)
INTENSITY_NAMES = ("mean", "median", "std_dev", "skewness", "kurtosis")
GLCM_NAMES = (
    "energy",
    "entropy",
    "correlation",
    "inverse_difference_moment",
    "inertia",
    "cluster_shade",
    "cluster_prominence",
    "haralick_correlation",
)
RUN_LENGTH_NAMES = (
    "gray_level_nonuniformity",
    "run_length_nonuniformity",
    "low_gray_run_emphasis",
    "high_gray_run_emphasis",
    "short_run_low_gray_emphasis",
    "short_run_high_gray_emphasis",
    "long_run_low_gray_emphasis",
    "long_run_high_gray_emphasis",
)

FEATURE_NAMES = MORPHOLOGY_NAMES + INTENSITY_NAMES + GLCM_NAMES + RUN_LENGTH_NAMES
#: Column names used in features.csv, in canonical order.
FEATURE_COLUMNS = tuple(f"f{i + 1:02d}_{name}" for i, name in enumerate(FEATURE_NAMES))
N_FEATURES = len(FEATURE_NAMES)
assert N_FEATURES == 31


@dataclass(frozen=True)
class Patch:
    """An 8-bit RGB region with its slide and patient lineage."""

    pixels: np.ndarray
    patch_id: str = ""
    wsi_id: str = ""
    patient_id: str = ""

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"patch pixels must be (height, width, 3), got {px.shape}")
        if px.shape[0] == 0 or px.shape[1] == 0:
            raise ValueError("patch must have positive width and height")
        if px.dtype != np.uint8:
            if px.min() < 0 or px.max() > 255:
                raise ValueError("patch pixels must lie in [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


@dataclass(frozen=True)
class FeatureVector:
    patch_id: str
    wsi_id: str
    patient_id: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("feature values must be 1-D")
        if not np.all(np.isfinite(v)):
            raise InvalidValue(f"feature vector {self.patch_id!r} has non-finite values")
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return (
            (self.patch_id, self.wsi_id, self.patient_id)
            == (other.patch_id, other.wsi_id, other.patient_id)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True)
class StainReference:
    """Macenko stain basis: unit-norm H and E optical-density columns."""

    stain_matrix: np.ndarray
    max_concentrations: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.stain_matrix, dtype=np.float64)
        c = np.asarray(self.max_concentrations, dtype=np.float64)
        if m.shape != (3, 2) or c.shape != (2,):
            raise ValueError("stain_matrix must be 3x2 and max_concentrations length 2")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(c))):
            raise ValueError("stain reference must be finite")
        object.__setattr__(self, "stain_matrix", m)
        object.__setattr__(self, "max_concentrations", c)

    def to_dict(self):
        return {
            "stain_matrix": self.stain_matrix.tolist(),
            "max_concentrations": self.max_concentrations.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["stain_matrix"]), np.array(d["max_concentrations"]))
