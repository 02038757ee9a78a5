"""Road representation, signed curvature, hysteresis shape labels and segmentation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import DegenerateGeometry, RoadTooShort, ValidationError

COLLINEAR_EPS = 1e-12
MIN_POINT_SEPARATION = 1e-9


class ShapeLabel(str, Enum):
    STRAIGHT = "straight"
    LEFT = "left"
    RIGHT = "right"

    @property
    def rank(self) -> int:
        return _SHAPE_RANK[self]

    def __lt__(self, other: "ShapeLabel") -> bool:  # type: ignore[override]
        return self.rank < other.rank

    def mirrored(self) -> "ShapeLabel":
        if self is ShapeLabel.LEFT:
            return ShapeLabel.RIGHT
        if self is ShapeLabel.RIGHT:
            return ShapeLabel.LEFT
        return self


_SHAPE_RANK = {ShapeLabel.STRAIGHT: 0, ShapeLabel.LEFT: 1, ShapeLabel.RIGHT: 2}


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError(f"non-finite point ({self.x}, {self.y})")


@dataclass(frozen=True)
class ScenarioConfig:
    initial_position: Point2D = Point2D(0.0, 0.0)
    initial_speed: float = 0.0
    extra: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.initial_speed >= 0:
            raise ValidationError(f"initial_speed must be >= 0, got {self.initial_speed}")


@dataclass(frozen=True)
class Road:
    id: str
    points: Tuple[Point2D, ...]
    config: ScenarioConfig = ScenarioConfig()

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.points) < 3:
            raise RoadTooShort(f"road {self.id!r} has {len(self.points)} points, need >= 3")

    def xy(self) -> np.ndarray:
        return np.array([(p.x, p.y) for p in self.points], dtype=np.float64)

    @classmethod
    def from_xy(cls, id: str, xy, config: ScenarioConfig | None = None) -> "Road":
        pts = tuple(Point2D(float(x), float(y)) for x, y in xy)
        return cls(id, pts, config if config is not None else ScenarioConfig())

    def arc_length(self) -> float:
        return _arc_length(self.xy(), 0, len(self.points) - 1)


@dataclass(frozen=True)
class CurvatureProfile:
    """Signed curvature at interior points; values[j] belongs to road point j + 1.

    Positive values are left (counterclockwise) turns.
    """

    values: Tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class SegmentationParams:
    tau_c: float = 0.015
    window_w: int = 3
    min_length: float = 10.0

    def __post_init__(self) -> None:
        if not self.tau_c > 0:
            raise ValidationError("tau_c must be > 0")
        if self.window_w < 1:
            raise ValidationError("window_w must be >= 1")
        if not self.min_length > 0:
            raise ValidationError("min_length must be > 0")


@dataclass(frozen=True)
class Section:
    id: str
    road_id: str
    shape: ShapeLabel
    start_index: int
    end_index: int
    curvature_seq: Tuple[float, ...]
    arc_length: float

    @property
    def mean_abs_curvature(self) -> float:
        return math.fsum(abs(k) for k in self.curvature_seq) / len(self.curvature_seq)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "road_id": self.road_id,
            "shape": self.shape.value,
            "start_index": self.start_index,
            "end_index": self.end_index,
            "curvature_seq": list(self.curvature_seq),
            "arc_length": self.arc_length,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Section":
        return cls(
            id=str(d["id"]),
            road_id=str(d["road_id"]),
            shape=ShapeLabel(d["shape"]),
            start_index=int(d["start_index"]),
            end_index=int(d["end_index"]),
            curvature_seq=tuple(float(v) for v in d["curvature_seq"]),
            arc_length=float(d["arc_length"]),
        )


def _arc_length(xy: np.ndarray, start: int, end: int) -> float:
    seg = np.diff(xy[start:end + 1], axis=0)
    return math.fsum(math.hypot(dx, dy) for dx, dy in seg)


def three_point_curvature(p0, p1, p2) -> float:
    """Signed inverse circumradius of three consecutive points."""
    x0, y0 = p0
    x1, y1 = p1
    x2, y2 = p2
    det = (x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1)
    if abs(det) < COLLINEAR_EPS:
        return 0.0
    a = math.hypot(x2 - x1, y2 - y1)
    b = math.hypot(x2 - x0, y2 - y0)
    c = math.hypot(x1 - x0, y1 - y0)
    rad = (a * b * c) / (2.0 * abs(det))
    return math.copysign(1.0 / rad, det)


def compute_curvature(road: Road) -> CurvatureProfile:
    pts = [(p.x, p.y) for p in road.points]
    for i in range(1, len(pts)):
        if math.hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1]) <= MIN_POINT_SEPARATION:
            raise DegenerateGeometry(f"road {road.id!r}: duplicate consecutive points at index {i}")
    return CurvatureProfile(tuple(
        three_point_curvature(pts[i - 1], pts[i], pts[i + 1]) for i in range(1, len(pts) - 1)
    ))


def _threshold_label(k: float, tau_c: float) -> ShapeLabel:
    if k >= tau_c:
        return ShapeLabel.LEFT
    if k <= -tau_c:
        return ShapeLabel.RIGHT
    return ShapeLabel.STRAIGHT


def classify_points(profile: CurvatureProfile | Sequence[float],
                    params: SegmentationParams) -> List[ShapeLabel]:
    """Hysteresis labels: a label changes only when a whole forward window agrees.

    Windows running past the end are truncated. The first value falls back to a
    single-value threshold when its window is mixed.
    """
    values = profile.values if isinstance(profile, CurvatureProfile) else tuple(profile)
    if not values:
        raise ValidationError("empty curvature profile")
    tau, w = params.tau_c, params.window_w
    labels: List[ShapeLabel] = []
    for i in range(len(values)):
        window = values[i:i + w]
        if all(abs(k) < tau for k in window):
            lab = ShapeLabel.STRAIGHT
        elif all(k > tau for k in window):
            lab = ShapeLabel.LEFT
        elif all(k < -tau for k in window):
            lab = ShapeLabel.RIGHT
        elif labels:
            lab = labels[-1]
        else:
            lab = _threshold_label(values[0], tau)
        labels.append(lab)
    return labels


@dataclass
class _Run:
    shape: ShapeLabel
    start: int  # first owned point
    stop: int   # one past the last owned point


def _merge_into(dst: _Run, src: _Run) -> _Run:
    return _Run(dst.shape, min(dst.start, src.start), max(dst.stop, src.stop))


def segment_road(road: Road, params: SegmentationParams = SegmentationParams(),
                 profile: CurvatureProfile | None = None) -> List[Section]:
    """Split a road into maximal same-shape sections of at least ``min_length``.

    Adjacent sections share their boundary point, so ``end_index`` of one section
    equals ``start_index`` of the next and arc lengths add up to the road length.
    """
    if profile is None:
        profile = compute_curvature(road)
    return sections_from_labels(road, classify_points(profile, params), profile, params)


def sections_from_labels(road: Road, labels: Sequence[ShapeLabel], profile: CurvatureProfile,
                         params: SegmentationParams = SegmentationParams()) -> List[Section]:
    """Turn per-interior-point labels into merged sections."""
    xy = road.xy()
    n = len(xy)
    if len(labels) != n - 2 or len(profile) != n - 2:
        raise ValidationError(f"road {road.id!r}: expected {n - 2} labels and curvature values")
    total = _arc_length(xy, 0, n - 1)
    if total < params.min_length:
        raise RoadTooShort(
            f"road {road.id!r} is {total:.3f} m long, shorter than min_length {params.min_length}")

    # endpoints have no curvature; they inherit their neighbour's label
    point_labels = [labels[0], *labels, labels[-1]]
    runs: List[_Run] = []
    for i, lab in enumerate(point_labels):
        if runs and runs[-1].shape is lab:
            runs[-1].stop = i + 1
        else:
            runs.append(_Run(lab, i, i + 1))

    def length(r: _Run) -> float:
        return _arc_length(xy, r.start, min(r.stop, n - 1))

    # a short leading run merges forward, others merge backward
    while len(runs) > 1 and length(runs[0]) < params.min_length:
        runs[1] = _merge_into(runs[1], runs[0])
        del runs[0]
    merged: List[_Run] = []
    for r in runs:
        if merged and (length(r) < params.min_length or r.shape is merged[-1].shape):
            merged[-1] = _merge_into(merged[-1], r)
        else:
            merged.append(r)

    kappa = profile.values
    sections: List[Section] = []
    for k, r in enumerate(merged):
        end = min(r.stop, n - 1)
        sections.append(Section(
            id=f"{road.id}:S{k:02d}",
            road_id=road.id,
            shape=r.shape,
            start_index=r.start,
            end_index=end,
            curvature_seq=tuple(kappa[p - 1] for p in range(r.start, r.stop) if 1 <= p <= n - 2),
            arc_length=_arc_length(xy, r.start, end),
        ))
    return sections


def mirror_road(road: Road) -> Road:
    """Reflect across the x-axis; flips every curvature sign."""
    return Road.from_xy(road.id, [(p.x, -p.y) for p in road.points], road.config)
