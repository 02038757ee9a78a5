"""Driving-difficulty indicators from telemetry and the distance between them."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence

import numpy as np

from .errors import InsufficientSamples, NotNormalized, ValidationError
from .geometry import Section

log = logging.getLogger(__name__)

INDICATORS = ("speed_var", "steering_var", "mean_abs_cte", "yaw_var")


@dataclass(frozen=True)
class TelemetrySample:
    test_id: str
    t: float
    speed: float
    steering: float
    cte: float
    yaw_rate: float
    nearest_point_index: int


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    test_id: str
    failed: bool
    oob_count: int = 0

    def __post_init__(self) -> None:
        if self.oob_count < 0:
            raise ValidationError("oob_count must be >= 0")
        if self.oob_count and not self.failed:
            raise ValidationError(f"{self.test_id}: oob_count > 0 but failed is false")


@dataclass(frozen=True)
class DynamicProfile:
    speed_var: float = 0.0
    steering_var: float = 0.0
    mean_abs_cte: float = 0.0
    yaw_var: float = 0.0
    normalized: bool = False

    def as_array(self) -> np.ndarray:
        return np.array([self.speed_var, self.steering_var, self.mean_abs_cte, self.yaw_var])

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in (*INDICATORS, "normalized")}


def _pstd(values: Sequence[float]) -> float:
    n = len(values)
    mean = math.fsum(values) / n
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / n)


def extract_profile(samples: Sequence[TelemetrySample]) -> DynamicProfile:
    """Raw indicators: population std of speed, steering, yaw rate and mean |cte|."""
    if len(samples) < 2:
        raise InsufficientSamples(f"need >= 2 telemetry samples, got {len(samples)}")
    # fsum is exactly rounded, so sample order cannot change the result
    return DynamicProfile(
        speed_var=_pstd([s.speed for s in samples]),
        steering_var=_pstd([s.steering for s in samples]),
        mean_abs_cte=math.fsum(abs(s.cte) for s in samples) / len(samples),
        yaw_var=_pstd([s.yaw_rate for s in samples]),
    )


def samples_in_section(samples: Iterable[TelemetrySample], section: Section) -> List[TelemetrySample]:
    return [s for s in samples
            if section.start_index <= s.nearest_point_index <= section.end_index]


def section_profile(samples: Sequence[TelemetrySample], section: Section) -> DynamicProfile:
    """Profile of the samples mapped into ``section``.

    Sections the vehicle never reached (fewer than two samples) get a zero profile.
    """
    mine = samples_in_section(samples, section)
    if len(mine) < 2:
        log.warning("section %s has %d telemetry samples; using a zero profile",
                    section.id, len(mine))
        return DynamicProfile()
    return extract_profile(mine)


def normalize_profiles(profiles: Sequence[DynamicProfile]) -> List[DynamicProfile]:
    """Min-max scale each indicator over the whole set; constant indicators map to 0."""
    if not profiles:
        return []
    cols = {name: [getattr(p, name) for p in profiles] for name in INDICATORS}
    scaled: Dict[str, List[float]] = {}
    for name, vals in cols.items():
        lo, hi = min(vals), max(vals)
        if hi == lo:
            scaled[name] = [0.0] * len(vals)
        else:
            scaled[name] = [min(1.0, max(0.0, (v - lo) / (hi - lo))) for v in vals]
    return [
        DynamicProfile(**{name: scaled[name][i] for name in INDICATORS}, normalized=True)
        for i in range(len(profiles))
    ]


def normalize_mapping(profiles: Mapping[str, DynamicProfile]) -> Dict[str, DynamicProfile]:
    keys = sorted(profiles)
    return dict(zip(keys, normalize_profiles([profiles[k] for k in keys])))


def dynamic_distance(p: DynamicProfile, q: DynamicProfile) -> float:
    if not (p.normalized and q.normalized):
        raise NotNormalized("dynamic_distance needs normalized profiles")
    return (abs(p.speed_var - q.speed_var) + abs(p.steering_var - q.steering_var)
            + abs(p.mean_abs_cte - q.mean_abs_cte) + abs(p.yaw_var - q.yaw_var)) / 4.0


def group_by_test(samples: Iterable[TelemetrySample]) -> Dict[str, List[TelemetrySample]]:
    out: Dict[str, List[TelemetrySample]] = {}
    for s in samples:
        out.setdefault(s.test_id, []).append(s)
    for trace in out.values():
        trace.sort(key=lambda s: s.t)
    return out
