"""PGIX binary index files.

Layout, little-endian: magic ``PGIX``, version byte, dim (u32), n (u64),
weights (dim f64), means then scales (2*dim f64), then n records of
id length (u32), UTF-8 id, and the raw vector (dim f64).
"""

import struct

import numpy as np

from .. import INDEX_FORMAT_VERSION
from ..exceptions import IndexFormatError

MAGIC = b"PGIX"
VERSION = INDEX_FORMAT_VERSION
_HEADER = struct.Struct("<4sBIQ")
_ID_LEN = struct.Struct("<I")


def dumps(index):
    dim, n = index.dim, index.n
    parts = [
        _HEADER.pack(MAGIC, VERSION, dim, n),
        index.weights_.astype("<f8").tobytes(),
        index.mean_.astype("<f8").tobytes(),
        index.scale_.astype("<f8").tobytes(),
    ]
    for vid, row in zip(index.ids_, index.raw_):
        b = vid.encode("utf-8")
        parts += [_ID_LEN.pack(len(b)), b, row.astype("<f8").tobytes()]
    return b"".join(parts)


def loads(data, n_jobs=1):
    from .search import SimilarityIndex

    data = memoryview(bytes(data))
    if len(data) < _HEADER.size or bytes(data[:4]) != MAGIC:
        raise IndexFormatError("not a PGIX file")
    _, version, dim, n = _HEADER.unpack_from(data, 0)
    if version != VERSION:
        raise IndexFormatError(f"unsupported PGIX version {version}")
    off = _HEADER.size

    def take(count):
        nonlocal off
        end = off + 8 * count
        if end > len(data):
            raise IndexFormatError("PGIX file is truncated")
        arr = np.frombuffer(data[off:end], dtype="<f8").astype(np.float64)
        off = end
        return arr

    weights, mean, scale = take(dim), take(dim), take(dim)
    ids = []
    X = np.empty((n, dim))
    for i in range(n):
        if off + _ID_LEN.size > len(data):
            raise IndexFormatError("PGIX file is truncated")
        (length,) = _ID_LEN.unpack_from(data, off)
        off += _ID_LEN.size
        if off + length > len(data):
            raise IndexFormatError("PGIX file is truncated")
        try:
            ids.append(bytes(data[off:off + length]).decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise IndexFormatError(f"record {i} has an invalid id") from exc
        off += length
        X[i] = take(dim)
    if off != len(data):
        raise IndexFormatError(f"{len(data) - off} trailing bytes after the last record")
    if np.any(weights <= 0) or np.any(scale <= 0):
        raise IndexFormatError("weights and scales must be positive")
    return SimilarityIndex(n_jobs=n_jobs)._set_state(X, ids, mean, scale, weights)


def save_index(index, path):
    with open(path, "wb") as fh:
        fh.write(dumps(index))


def load_index(path, n_jobs=1):
    with open(path, "rb") as fh:
        return loads(fh.read(), n_jobs=n_jobs)
