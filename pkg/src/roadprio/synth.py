"""Synthetic campaigns with known ground truth.

Roads are chains of straight and circular-arc templates joined with matching
tangents. Telemetry follows a deliberately simple model (steering proportional
to curvature, speed loss, cte and yaw rate growing with curvature) plus seeded
Gaussian noise. Outcomes follow the failure rule exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .dynamics import TelemetrySample, TestOutcome
from .errors import InvalidSpec
from .geometry import Road, ScenarioConfig, Point2D, ShapeLabel, compute_curvature
from .io import outcomes_csv, roads_document, telemetry_csv, write_json

WHEELBASE = 2.5
LATERAL_REF = 4.0  # m/s^2
CHANNELS = ("speed", "steering", "cte", "yaw_rate")


@dataclass(frozen=True)
class TemplateSpec:
    id: str
    shape: ShapeLabel
    radius: float = 0.0      # curves
    arc_angle: float = 0.0   # curves, radians
    length: float = 0.0      # straights
    point_spacing: float = 1.0

    def __post_init__(self) -> None:
        if self.point_spacing <= 0:
            raise InvalidSpec(f"template {self.id}: point_spacing must be > 0")
        if self.shape is ShapeLabel.STRAIGHT:
            if self.length <= 0:
                raise InvalidSpec(f"template {self.id}: straight needs length > 0")
        elif self.radius <= 0 or self.arc_angle <= 0:
            raise InvalidSpec(f"template {self.id}: curve needs radius > 0 and arc_angle > 0")

    @property
    def arc_length(self) -> float:
        return self.length if self.shape is ShapeLabel.STRAIGHT else self.radius * self.arc_angle

    @property
    def curvature(self) -> float:
        if self.shape is ShapeLabel.STRAIGHT:
            return 0.0
        k = 1.0 / self.radius
        return k if self.shape is ShapeLabel.LEFT else -k

    @classmethod
    def from_dict(cls, d: Mapping) -> "TemplateSpec":
        try:
            angle = d.get("arc_angle")
            if angle is None and "arc_angle_deg" in d:
                angle = math.radians(float(d["arc_angle_deg"]))
            return cls(
                id=str(d["id"]),
                shape=ShapeLabel(d["shape"]),
                radius=float(d.get("radius", 0.0)),
                arc_angle=float(angle or 0.0),
                length=float(d.get("length", 0.0)),
                point_spacing=float(d.get("point_spacing", 1.0)),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise InvalidSpec(f"bad template {d!r}: {exc}") from exc


@dataclass(frozen=True)
class RoadSpec:
    templates: Tuple[str, ...]
    # multiplies the curvature-driven part of cte and yaw rate
    difficulty: float = 1.0

    @classmethod
    def parse(cls, entry) -> "RoadSpec":
        if isinstance(entry, Mapping):
            return cls(tuple(str(t) for t in entry["templates"]), float(entry.get("difficulty", 1.0)))
        return cls(tuple(str(t) for t in entry))


@dataclass(frozen=True)
class SynthCampaignSpec:
    templates: Tuple[TemplateSpec, ...]
    roads: Tuple[RoadSpec, ...]
    duplicate_factor: int = 1
    # {"kind": "radius_below", "value": 40} | {"kind": "none"} | {"kind": "roads", "indices": [...]}
    failure_rule: Mapping = field(default_factory=lambda: {"kind": "none"})
    telemetry_noise: Mapping[str, float] = field(default_factory=dict)
    seed: int = 0
    base_speed: float = 15.0
    # initial speed added per duplicate copy
    copy_speed_step: float = 0.0
    campaign: str = "synthetic"

    def __post_init__(self) -> None:
        ids = [t.id for t in self.templates]
        if len(set(ids)) != len(ids):
            raise InvalidSpec("duplicate template ids")
        known = set(ids)
        for i, r in enumerate(self.roads):
            if not r.templates:
                raise InvalidSpec(f"road {i} has no templates")
            bad = [t for t in r.templates if t not in known]
            if bad:
                raise InvalidSpec(f"road {i} references unknown templates {bad}")
        if self.duplicate_factor < 1:
            raise InvalidSpec("duplicate_factor must be >= 1")
        if self.base_speed <= 0:
            raise InvalidSpec("base_speed must be > 0")
        for ch, v in self.telemetry_noise.items():
            if ch not in CHANNELS or v < 0:
                raise InvalidSpec(f"bad telemetry noise entry {ch}={v}")
        if self.failure_rule.get("kind") not in ("none", "radius_below", "roads"):
            raise InvalidSpec(f"unknown failure rule {self.failure_rule!r}")

    @classmethod
    def from_dict(cls, d: Mapping) -> "SynthCampaignSpec":
        try:
            return cls(
                templates=tuple(TemplateSpec.from_dict(t) for t in d["templates"]),
                roads=tuple(RoadSpec.parse(r) for r in d["roads"]),
                duplicate_factor=int(d.get("duplicate_factor", 1)),
                failure_rule=dict(d.get("failure_rule", {"kind": "none"})),
                telemetry_noise={str(k): float(v) for k, v in d.get("telemetry_noise", {}).items()},
                seed=int(d.get("seed", 0)),
                base_speed=float(d.get("base_speed", 15.0)),
                copy_speed_step=float(d.get("copy_speed_step", 0.0)),
                campaign=str(d.get("campaign", "synthetic")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"bad campaign spec: {exc}") from exc


@dataclass
class SynthCampaign:
    name: str
    roads: List[Road]
    telemetry: List[TelemetrySample]
    outcomes: List[TestOutcome]
    # point indices where consecutive templates meet, per road
    joints: Dict[str, List[int]]
    # template id sequence per road
    layout: Dict[str, Tuple[str, ...]]

    @property
    def failures(self) -> set:
        return {o.test_id for o in self.outcomes if o.failed}


def build_polyline(templates: Sequence[TemplateSpec]) -> Tuple[np.ndarray, List[int]]:
    """Chain templates from the origin heading +x; returns points and joint indices."""
    pts = [(0.0, 0.0)]
    heading = 0.0
    joints: List[int] = []
    for ti, tpl in enumerate(templates):
        x0, y0 = pts[-1]
        steps = max(2, math.ceil(tpl.arc_length / tpl.point_spacing - 1e-9))
        if tpl.shape is ShapeLabel.STRAIGHT:
            ds = tpl.length / steps
            for s in range(1, steps + 1):
                pts.append((x0 + s * ds * math.cos(heading), y0 + s * ds * math.sin(heading)))
        else:
            turn = 1.0 if tpl.shape is ShapeLabel.LEFT else -1.0
            r = tpl.radius
            # centre sits to the left (or right) of the heading
            cx = x0 - turn * r * math.sin(heading)
            cy = y0 + turn * r * math.cos(heading)
            start = math.atan2(y0 - cy, x0 - cx)
            dphi = turn * tpl.arc_angle / steps
            for s in range(1, steps + 1):
                a = start + s * dphi
                pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))
            heading += turn * tpl.arc_angle
        if ti < len(templates) - 1:
            joints.append(len(pts) - 1)
    return np.array(pts), joints


def _fails(rule: Mapping, templates: Sequence[TemplateSpec], base_index: int) -> int:
    """OOB count implied by the rule (0 = pass)."""
    kind = rule.get("kind", "none")
    if kind == "radius_below":
        limit = float(rule["value"])
        return sum(1 for t in templates if t.shape is not ShapeLabel.STRAIGHT and t.radius < limit)
    if kind == "roads":
        return 1 if base_index in set(int(i) for i in rule.get("indices", [])) else 0
    return 0


def _telemetry(road: Road, difficulty: float, noise: Mapping[str, float],
               rng: np.random.Generator) -> List[TelemetrySample]:
    kappa = list(compute_curvature(road).values)
    kappa = [kappa[0], *kappa, kappa[-1]]
    xy = road.xy()
    v0 = road.config.initial_speed
    out = []
    t = 0.0
    for i, k in enumerate(kappa):
        if i:
            t += float(np.hypot(*(xy[i] - xy[i - 1]))) / max(v_prev, 0.1)
        ak = abs(k)
        v = v0 * (1.0 - min(0.5, 4.0 * ak))
        steer = WHEELBASE * k
        # tracking error grows superlinearly with lateral acceleration
        lat = v * v * ak / LATERAL_REF
        cte = difficulty * math.copysign(0.1 * lat * (1.0 + lat * lat), k)
        yaw = v * k * (1.0 + difficulty * 0.5 * lat * lat)
        scale = 1.0 + ak / 0.015
        out.append(TelemetrySample(
            test_id=road.id,
            t=t,
            speed=v + rng.normal(0.0, noise.get("speed", 0.0)),
            steering=steer + rng.normal(0.0, noise.get("steering", 0.0)),
            cte=cte + rng.normal(0.0, noise.get("cte", 0.0)) * scale,
            yaw_rate=yaw + rng.normal(0.0, noise.get("yaw_rate", 0.0)) * scale,
            nearest_point_index=i,
        ))
        v_prev = v
    return out


def generate_campaign(spec: SynthCampaignSpec) -> SynthCampaign:
    tpl = {t.id: t for t in spec.templates}
    rng = np.random.default_rng(spec.seed)
    roads: List[Road] = []
    telemetry: List[TelemetrySample] = []
    outcomes: List[TestOutcome] = []
    joints: Dict[str, List[int]] = {}
    layout: Dict[str, Tuple[str, ...]] = {}
    width = max(3, len(str(len(spec.roads))))
    for b, rs in enumerate(spec.roads):
        chain = [tpl[t] for t in rs.templates]
        xy, jts = build_polyline(chain)
        oob = _fails(spec.failure_rule, chain, b)
        for c in range(spec.duplicate_factor):
            rid = f"R{b:0{width}d}" if spec.duplicate_factor == 1 else f"R{b:0{width}d}-{c}"
            speed = spec.base_speed + c * spec.copy_speed_step
            road = Road.from_xy(rid, xy, ScenarioConfig(Point2D(0.0, 0.0), speed,
                                                        {"templates": "+".join(rs.templates)}))
            roads.append(road)
            telemetry.extend(_telemetry(road, rs.difficulty, spec.telemetry_noise, rng))
            outcomes.append(TestOutcome(rid, oob > 0, oob))
            joints[rid] = list(jts)
            layout[rid] = rs.templates
    return SynthCampaign(spec.campaign, roads, telemetry, outcomes, joints, layout)


def write_campaign(campaign: SynthCampaign, out_dir: Path | str) -> Dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"roads": out / "roads.json", "telemetry": out / "telemetry.csv",
             "outcomes": out / "outcomes.csv"}
    write_json(paths["roads"], roads_document(campaign.name, campaign.roads))
    paths["telemetry"].write_text(telemetry_csv(campaign.telemetry), encoding="utf-8")
    paths["outcomes"].write_text(outcomes_csv(campaign.outcomes), encoding="utf-8")
    return paths
