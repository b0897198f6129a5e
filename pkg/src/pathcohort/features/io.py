"""Patch and mask file I/O.

Patches are 8-bit RGB PNGs (``X.png``) or raw interleaved RGB bytes
(``X.raw``) with a sidecar ``X.raw.txt`` holding ``width height``. Masks
are 16-bit grayscale PNGs of instance labels named ``X.mask.png``.
"""

from pathlib import Path

import numpy as np
from PIL import Image

from .types import Patch

MASK_SUFFIX = ".mask.png"


def read_rgb(path):
    path = Path(path)
    if path.suffix == ".raw":
        side = Path(str(path) + ".txt")
        width, height = (int(t) for t in side.read_text().split()[:2])
        data = np.frombuffer(path.read_bytes(), dtype=np.uint8)
        if data.size != width * height * 3:
            raise ValueError(f"{path}: expected {width * height * 3} bytes, found {data.size}")
        return data.reshape(height, width, 3).copy()
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def write_rgb(path, pixels):
    path = Path(path)
    pixels = np.asarray(pixels, dtype=np.uint8)
    if path.suffix == ".raw":
        path.write_bytes(pixels.tobytes())
        Path(str(path) + ".txt").write_text(f"{pixels.shape[1]} {pixels.shape[0]}\n")
    else:
        Image.fromarray(pixels, mode="RGB").save(path)


def read_mask(path):
    with Image.open(path) as im:
        arr = np.asarray(im)
    if arr.ndim != 2:
        raise ValueError(f"{path}: mask must be single-channel")
    return arr.astype(np.int64)


def write_mask(path, labels):
    labels = np.asarray(labels)
    if labels.min() < 0 or labels.max() > 65535:
        raise ValueError("mask labels must fit in 16 bits")
    Image.fromarray(labels.astype(np.uint16)).save(path)


def patch_id_for(path):
    name = Path(path).name
    for suffix in (".png", ".raw"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return Path(path).stem


def find_patch_files(patch_dir):
    """Patch image files in ``patch_dir`` (masks excluded), sorted by name."""
    out = []
    for p in sorted(Path(patch_dir).iterdir()):
        if p.name.endswith(MASK_SUFFIX) or not p.is_file():
            continue
        if p.suffix in (".png", ".raw"):
            out.append(p)
    return out


def mask_path_for(patch_path, mask_dir):
    return Path(mask_dir) / (patch_id_for(patch_path) + MASK_SUFFIX)


def load_patch(path, wsi_id="", patient_id=""):
    return Patch(read_rgb(path), patch_id_for(path), wsi_id, patient_id)
