"""Independent reference computations used as test oracles.

Everything here is written with plain loops and fractions, deliberately
sharing no code path with the package under test.
"""

import math
from fractions import Fraction

import numpy as np


def luma(rgb):
    r, g, b = (int(v) for v in rgb)
    return math.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5)


def quantize_loop(gray, mask, levels):
    vals = [gray[r][c] for r in range(len(mask)) for c in range(len(mask[0])) if mask[r][c]]
    lo, hi = min(vals), max(vals)
    out = {}
    for r in range(len(mask)):
        for c in range(len(mask[0])):
            if mask[r][c]:
                if hi == lo:
                    out[(r, c)] = 0
                else:
                    b = math.floor(Fraction(gray[r][c] - lo, hi - lo) * levels)
                    out[(r, c)] = min(b, levels - 1)
    return out


def glcm_brute(pixels, mask, levels, offset):
    """Symmetric co-occurrence probabilities by enumerating every in-mask pixel pair."""
    h, w = mask.shape
    gray = [[luma(pixels[r, c]) for c in range(w)] for r in range(h)]
    q = quantize_loop(gray, mask.tolist(), levels)
    cells = list(q)
    counts = {}
    total = 0
    for p in cells:
        for s in cells:
            if (s[0] - p[0], s[1] - p[1]) == offset or (p[0] - s[0], p[1] - s[1]) == offset:
                key = (q[p], q[s])
                counts[key] = counts.get(key, 0) + 1
                total += 1
    if total == 0:
        return None
    return {k: v / total for k, v in counts.items()}


def glcm_stats_loop(P):
    """Glossary formulas over a sparse probability dict ``{(i, j): p}``."""
    mu_x = sum(i * p for (i, j), p in P.items())
    mu_y = sum(j * p for (i, j), p in P.items())
    var_x = sum((i - mu_x) ** 2 * p for (i, j), p in P.items())
    var_y = sum((j - mu_y) ** 2 * p for (i, j), p in P.items())
    sx, sy = math.sqrt(var_x), math.sqrt(var_y)
    energy = sum(p * p for p in P.values())
    entropy = -sum(p * math.log(p) for p in P.values() if p > 0)
    inertia = sum((i - j) ** 2 * p for (i, j), p in P.items())
    idm = sum(p / (1 + (i - j) ** 2) for (i, j), p in P.items())
    shade = sum((i + j - mu_x - mu_y) ** 3 * p for (i, j), p in P.items())
    prom = sum((i + j - mu_x - mu_y) ** 4 * p for (i, j), p in P.items())
    if sx * sy > 0:
        corr = sum((i - mu_x) * (j - mu_y) * p for (i, j), p in P.items()) / (sx * sy)
        hcorr = (sum(i * j * p for (i, j), p in P.items()) - mu_x * mu_y) / (sx * sy)
    else:
        corr = hcorr = 1.0
    return [energy, entropy, corr, idm, inertia, shade, prom, hcorr]


def glcm_features_brute(pixels, mask, levels=32):
    rows = []
    for off in ((0, 1), (-1, 1), (-1, 0), (-1, -1)):
        P = glcm_brute(pixels, mask, levels, off)
        if P is not None:
            rows.append(glcm_stats_loop(P))
    if not rows:
        return None
    return [sum(col) / len(rows) for col in zip(*rows)]


def km_product_limit(times, events):
    """Exact product-limit table as Fractions: [(t, S, n_at_risk, d)]."""
    table = []
    s = Fraction(1)
    for t in sorted(set(times)):
        n = sum(1 for u in times if u >= t)
        d = sum(1 for u, e in zip(times, events) if u == t and e)
        if d == 0:
            continue
        s *= Fraction(n - d, n)
        table.append((t, s, n, d))
    return table


def partial_loglik_naive(x, time, event, beta):
    """Breslow partial log-likelihood by direct double loop (scalar or vector beta)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] != len(time):
        x = x.T
    beta = np.atleast_1d(beta)
    total = 0.0
    for i in range(len(time)):
        if not event[i]:
            continue
        num = sum(beta[k] * x[i, k] for k in range(len(beta)))
        den = 0.0
        for j in range(len(time)):
            if time[j] >= time[i]:
                den += math.exp(sum(beta[k] * x[j, k] for k in range(len(beta))))
        total += num - math.log(den)
    return total


def weighted_distance_loop(a, b, w):
    return math.sqrt(math.fsum(wj * (aj - bj) ** 2 for aj, bj, wj in zip(a, b, w)))


def full_scan_sort(Z, q, w, k):
    """Indices of the k nearest rows, ties by index, via Python's sort."""
    d = [(weighted_distance_loop(row, q, w), i) for i, row in enumerate(Z)]
    d.sort()
    return d[:k]


def chi2_sf_1df(x):
    """Upper tail of chi-square with 1 df through the complementary error function."""
    return math.erfc(math.sqrt(x / 2.0))
