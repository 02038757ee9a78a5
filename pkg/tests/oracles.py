"""Slow, obviously-correct reference implementations used as test oracles."""

from __future__ import annotations

import itertools
from fractions import Fraction
from statistics import fmean


def warping_paths(n, m):
    """Every monotone path from (0, 0) to (n-1, m-1) with unit steps."""
    def walk(i, j):
        if (i, j) == (n - 1, m - 1):
            yield [(i, j)]
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            a, b = i + di, j + dj
            if a < n and b < m:
                for rest in walk(a, b):
                    yield [(i, j)] + rest
    yield from walk(0, 0)


def dtw_brute(a, b, span):
    best = None
    for path in warping_paths(len(a), len(b)):
        cost = 0.0
        for i, j in path:
            cost += min(1.0, abs(a[i] - b[j]) / span)
        key = (cost, len(path))
        if best is None or key < best:
            best = key
    return best[0] / best[1]


def inclusion_brute(p, q, span):
    return max(1.0 - dtw_brute(p, q[k:k + len(p)], span) for k in range(len(q) - len(p) + 1))


def complete_linkage_naive(ids, dist, cut=None):
    """Textbook complete linkage on a dict-of-pairs distance, stopped at ``cut``.

    ``cut`` defaults to the mean of the off-diagonal entries.
    """
    ids = list(ids)
    if cut is None:
        pairs = [dist[a, b] for a, b in itertools.combinations(ids, 2)]
        cut = fmean(pairs) if pairs else 0.0
    clusters = [[i] for i in ids]
    while len(clusters) > 1:
        cands = []
        for x, y in itertools.combinations(clusters, 2):
            d = max(dist[a, b] for a in x for b in y)
            cands.append((d, tuple(sorted((min(x), min(y)))), x, y))
        d, _, x, y = min(cands, key=lambda c: (c[0], c[1]))
        if d > cut:
            break
        clusters.remove(x)
        clusters.remove(y)
        clusters.append(sorted(x + y))
    return sorted((sorted(c) for c in clusters), key=lambda c: c[0])


def apfd_brute(order, failures):
    """Mean first-detection position, computed with exact fractions."""
    n, m = len(order), len(failures)
    positions = []
    for f in failures:
        for pos, t in enumerate(order, 1):
            if t == f:
                positions.append(pos)
                break
    mean_pos = Fraction(sum(positions), m)
    return float(1 - mean_pos / n + Fraction(1, 2 * n))
