"""DTW-based geometric distance between curved sections."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numba as nb
import numpy as np

from .errors import EmptySequence, ShapeMismatch, ValidationError
from .geometry import Section, ShapeLabel

KAPPA_SPAN_FLOOR = 0.05


@dataclass(frozen=True)
class SimilarityParams:
    tau_len: float = 0.8
    kappa_span: float = KAPPA_SPAN_FLOOR

    def __post_init__(self) -> None:
        if not 0 < self.tau_len <= 1:
            raise ValidationError("tau_len must lie in (0, 1]")
        if not self.kappa_span > 0:
            raise ValidationError("kappa_span must be > 0")


class GeomMode(str, Enum):
    DIRECT = "direct"
    INCLUSION = "inclusion"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class GeomDistance:
    value: float
    mode: GeomMode


def campaign_kappa_span(sections: Iterable[Section]) -> float:
    """Largest |curvature| over curved sections, never below the floor."""
    peak = 0.0
    for s in sections:
        if s.shape is not ShapeLabel.STRAIGHT:
            peak = max(peak, max(abs(k) for k in s.curvature_seq))
    return max(peak, KAPPA_SPAN_FLOOR)


@nb.njit(cache=True, nogil=True)
def _dtw_kernel(a, b, span):
    # accumulated (cost, length), minimised lexicographically
    n = a.shape[0]
    m = b.shape[0]
    cost = np.empty((n, m))
    steps = np.empty((n, m), dtype=np.int64)
    for i in range(n):
        for j in range(m):
            c = abs(a[i] - b[j]) / span
            if c > 1.0:
                c = 1.0
            if i == 0 and j == 0:
                cost[i, j] = c
                steps[i, j] = 1
                continue
            best_c = np.inf
            best_l = 0
            if i > 0:
                cc = cost[i - 1, j] + c
                ll = steps[i - 1, j] + 1
                if cc < best_c or (cc == best_c and ll < best_l):
                    best_c = cc
                    best_l = ll
            if j > 0:
                cc = cost[i, j - 1] + c
                ll = steps[i, j - 1] + 1
                if cc < best_c or (cc == best_c and ll < best_l):
                    best_c = cc
                    best_l = ll
            if i > 0 and j > 0:
                cc = cost[i - 1, j - 1] + c
                ll = steps[i - 1, j - 1] + 1
                if cc < best_c or (cc == best_c and ll < best_l):
                    best_c = cc
                    best_l = ll
            cost[i, j] = best_c
            steps[i, j] = best_l
    return cost[n - 1, m - 1], steps[n - 1, m - 1]


@nb.njit(cache=True, nogil=True)
def _best_window(p, q, span):
    # smallest normalised DTW of p against every |p|-long window of q
    lp = p.shape[0]
    best = np.inf
    for k in range(q.shape[0] - lp + 1):
        c, l = _dtw_kernel(p, q[k:k + lp], span)
        v = c / l
        if v < best:
            best = v
    return best


def _as_array(seq: Sequence[float]) -> np.ndarray:
    arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise EmptySequence("DTW needs non-empty 1-D sequences")
    return arr


def dtw_normalized(a: Sequence[float], b: Sequence[float],
                   params: SimilarityParams = SimilarityParams()) -> float:
    """Optimal warping cost divided by the warping path length.

    Per-step cost is ``|a_i - b_j| / kappa_span`` clamped to 1, so the result is in
    [0, 1]. Among equal-cost paths the shortest one is used.
    """
    cost, steps = _dtw_kernel(_as_array(a), _as_array(b), params.kappa_span)
    return float(cost / steps)


def length_ratio(p: Section, q: Section) -> float:
    lp, lq = len(p.curvature_seq), len(q.curvature_seq)
    return min(lp, lq) / max(lp, lq)


def inclusion_similarity(p: Section, q: Section,
                         params: SimilarityParams = SimilarityParams()) -> float:
    """Best ``1 - DTW`` of the shorter ``p`` over every alignment inside ``q``."""
    if p.shape is not q.shape:
        raise ShapeMismatch(f"{p.id} is {p.shape.value}, {q.id} is {q.shape.value}")
    a, b = _as_array(p.curvature_seq), _as_array(q.curvature_seq)
    if a.size > b.size:
        raise ValidationError("inclusion_similarity expects the shorter section first")
    return float(1.0 - _best_window(a, b, params.kappa_span))


def geometric_distance(p: Section, q: Section,
                       params: SimilarityParams = SimilarityParams()) -> GeomDistance:
    if p.shape is not q.shape or p.shape is ShapeLabel.STRAIGHT:
        return GeomDistance(1.0, GeomMode.INCOMPARABLE)
    if length_ratio(p, q) >= params.tau_len:
        return GeomDistance(dtw_normalized(p.curvature_seq, q.curvature_seq, params), GeomMode.DIRECT)
    short, long_ = (p, q) if len(p.curvature_seq) <= len(q.curvature_seq) else (q, p)
    return GeomDistance(1.0 - inclusion_similarity(short, long_, params), GeomMode.INCLUSION)
