"""Shape descriptors of one labeled nucleus."""

import math

import numpy as np
from scipy import ndimage

from .._validation import check_mask
from ..exceptions import UnknownNucleus

# clockwise 8-neighbourhood in (row, col), starting west
_DIRS = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))
_DIR_INDEX = {d: i for i, d in enumerate(_DIRS)}
_EIGHT = np.ones((3, 3), dtype=bool)


def nucleus_pixels(mask, nucleus_id):
    """Boolean region of ``nucleus_id``; raises UnknownNucleus if absent."""
    mask = check_mask(mask)
    region = mask == nucleus_id
    if nucleus_id <= 0 or not region.any():
        raise UnknownNucleus(f"nucleus {nucleus_id} not present in mask")
    return region


def _trace_contour(region, start):
    """Moore-neighbour trace of the outer contour containing ``start``.

    Returns the closed chain of pixel coordinates (start repeated at the end).
    Stops on Jacob's criterion: re-entering ``start`` by the same move.
    """
    h, w = region.shape

    def inside(r, c):
        return 0 <= r < h and 0 <= c < w and region[r, c]

    chain = [start]
    cur = start
    back = 0  # start is the first raster pixel, so its west neighbour is outside
    first_move = None
    for _ in range(4 * region.size + 8):
        nxt = None
        for k in range(1, 9):
            idx = (back + k) % 8
            dr, dc = _DIRS[idx]
            cand = (cur[0] + dr, cur[1] + dc)
            if inside(*cand):
                nxt = cand
                prev = (back + k - 1) % 8
                pr, pc = _DIRS[prev]
                bpos = (cur[0] + pr, cur[1] + pc)
                break
        if nxt is None:
            return chain  # isolated pixel
        move = (cur, nxt)
        if first_move is None:
            first_move = move
        elif move == first_move:
            return chain
        chain.append(nxt)
        back = _DIR_INDEX[(bpos[0] - nxt[0], bpos[1] - nxt[1])]
        cur = nxt
    return chain


def _chain_length(chain):
    total = 0.0
    for (r0, c0), (r1, c1) in zip(chain, chain[1:]):
        total += math.sqrt(2.0) if (r0 != r1 and c0 != c1) else 1.0
    return total


def perimeter(region):
    """8-connected boundary chain length, summed over connected components."""
    labels, n = ndimage.label(region, structure=_EIGHT)
    total = 0.0
    for k in range(1, n + 1):
        rows, cols = np.nonzero(labels == k)
        start = (int(rows[0]), int(cols[0]))
        total += _chain_length(_trace_contour(labels == k, start))
    return total


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points):
    """Andrew's monotone chain; returns hull vertices counter-clockwise."""
    pts = sorted(set(map(tuple, points)))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def polygon_area(vertices):
    if len(vertices) < 3:
        return 0.0
    v = np.asarray(vertices, dtype=np.float64)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _boundary(region):
    interior = ndimage.binary_erosion(region, border_value=0)
    return region & ~interior


def morphological_features(mask, nucleus_id):
    """Ten shape descriptors of one nucleus.

    Returns
    -------
    ndarray of shape (10,)
        area, perimeter, equivalent diameter, major and minor axis length,
        eccentricity, solidity, extent, circularity, aspect ratio.

    Notes
    -----
    Axis lengths are ``4 * sqrt(eigenvalue)`` of the pixel-coordinate
    covariance and are floored at 1 pixel. The convex hull is taken over the
    corners of boundary pixels so that it always covers the region.
    """
    return region_morphology(nucleus_pixels(mask, nucleus_id))


def region_morphology(region):
    rows, cols = np.nonzero(region)
    area = float(rows.size)

    perim = perimeter(region)
    eq_diam = math.sqrt(4.0 * area / math.pi)

    cov = np.cov(np.vstack([rows, cols]).astype(np.float64), bias=True) if area > 1 else np.zeros((2, 2))
    lam = np.clip(np.linalg.eigvalsh(np.atleast_2d(cov)), 0.0, None)
    major = max(4.0 * math.sqrt(lam[-1]), 1.0)
    minor = max(4.0 * math.sqrt(lam[0]), 1.0)
    ecc = math.sqrt(max(0.0, 1.0 - (minor / major) ** 2))

    br, bc = np.nonzero(_boundary(region))
    corners = np.concatenate([
        np.column_stack([br + dr, bc + dc]) for dr in (0, 1) for dc in (0, 1)
    ])
    hull_area = polygon_area(convex_hull(corners))
    solidity = min(area / hull_area, 1.0)

    bbox = (rows.max() - rows.min() + 1) * (cols.max() - cols.min() + 1)
    extent = area / float(bbox)
    circularity = 4.0 * math.pi * area / perim ** 2 if perim > 0 else 1.0
    return np.array([
        area, perim, eq_diam, major, minor, ecc, solidity, extent, circularity, major / minor,
    ])
