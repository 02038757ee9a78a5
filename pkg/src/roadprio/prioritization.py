"""Per-test priority scores and the two-group execution order."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .dynamics import DynamicProfile, TestOutcome
from .errors import MissingScore, NotNormalized, ValidationError
from .geometry import CurvatureProfile, Section
from .selection import SuiteSplit

WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class PriorityParams:
    alpha: float = 0.5
    beta: float = 0.5
    failure_bonus: float = 0.25
    kappa_thr: float = 0.015
    w_cv: float = 1 / 3
    w_hc: float = 1 / 3
    w_dt: float = 1 / 3

    def __post_init__(self) -> None:
        if abs(self.alpha + self.beta - 1) > WEIGHT_TOL:
            raise ValidationError(f"alpha + beta must be 1, got {self.alpha + self.beta}")
        if not 0.1 <= self.failure_bonus <= 0.5:
            raise ValidationError("failure_bonus must lie in [0.1, 0.5]")
        if abs(self.w_cv + self.w_hc + self.w_dt - 1) > WEIGHT_TOL:
            raise ValidationError("w_cv + w_hc + w_dt must be 1")


@dataclass(frozen=True)
class TestScore:
    __test__ = False

    test_id: str
    g: float
    d: float
    h: float
    p: float

    @classmethod
    def combine(cls, test_id: str, g: float, d: float, h: float,
                params: PriorityParams = PriorityParams()) -> "TestScore":
        return cls(test_id, g, d, h, params.alpha * g + params.beta * d + h)

    def to_dict(self) -> dict:
        return {"test_id": self.test_id, "g": self.g, "d": self.d, "h": self.h, "p": self.p}


@dataclass
class RankedSuite:
    covered_order: List[TestScore]
    surplus_order: List[TestScore]

    def order(self) -> List[str]:
        return [s.test_id for s in self.covered_order] + [s.test_id for s in self.surplus_order]


def _pstd(values: Sequence[float]) -> float:
    mean = math.fsum(values) / len(values)
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))


def geometric_score_raw(profile: CurvatureProfile | Sequence[float], sections: Sequence[Section],
                        params: PriorityParams = PriorityParams()) -> Tuple[float, int, int]:
    """(curvature std over the whole road, high-curvature section count, distinct shapes)."""
    values = profile.values if isinstance(profile, CurvatureProfile) else tuple(profile)
    sigma = _pstd(values) if values else 0.0
    n_hc = sum(1 for s in sections if s.mean_abs_curvature > params.kappa_thr)
    d_types = len({s.shape for s in sections})
    return sigma, n_hc, d_types


def _minmax(values: Sequence[float]) -> List[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def geometric_score(raw: Mapping[str, Tuple[float, int, int]],
                    params: PriorityParams = PriorityParams()) -> Dict[str, float]:
    """Campaign-wide min-max of each component, then the weighted sum."""
    if not raw:
        raise ValidationError("geometric_score needs at least one test")
    ids = sorted(raw)
    cols = [_minmax([float(raw[t][c]) for t in ids]) for c in range(3)]
    return {t: params.w_cv * cols[0][i] + params.w_hc * cols[1][i] + params.w_dt * cols[2][i]
            for i, t in enumerate(ids)}


def dynamic_score(profile: DynamicProfile) -> float:
    if not profile.normalized:
        raise NotNormalized("dynamic_score needs a normalized profile")
    return (profile.speed_var + profile.steering_var + profile.mean_abs_cte + profile.yaw_var) / 4.0


def historical_score(outcome: Optional[TestOutcome], params: PriorityParams = PriorityParams()) -> float:
    return params.failure_bonus if outcome is not None and outcome.failed else 0.0


def _sorted_group(ids: Sequence[str], scores: Mapping[str, TestScore]) -> List[TestScore]:
    missing = [t for t in ids if t not in scores]
    if missing:
        raise MissingScore(f"no score for tests {missing}")
    return sorted((scores[t] for t in ids), key=lambda s: (-s.p, s.test_id))


def rank(split: SuiteSplit, scores: Mapping[str, TestScore]) -> RankedSuite:
    """Covered tests first, each group by descending score, ties by ascending id."""
    return RankedSuite(_sorted_group(split.covered, scores), _sorted_group(split.surplus, scores))
