"""Coverage requirements from cluster representatives and the covered/surplus split."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence

from .clustering import ClusterSet
from .errors import OrphanRequirement, ValidationError


@dataclass(frozen=True)
class CoverageRequirement:
    section_id: str
    cluster_id: str
    road_id: str


@dataclass
class SuiteSplit:
    covered: List[str]
    surplus: List[str]
    coverage_map: Dict[str, List[str]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"covered": list(self.covered), "surplus": list(self.surplus),
                "coverage_map": {k: list(v) for k, v in self.coverage_map.items()}}

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteSplit":
        return cls([str(t) for t in d["covered"]], [str(t) for t in d["surplus"]],
                   {str(k): [str(s) for s in v] for k, v in d.get("coverage_map", {}).items()})


def build_requirements(clusters: ClusterSet,
                       section_roads: Mapping[str, str]) -> List[CoverageRequirement]:
    """One requirement per representative; ``section_roads`` maps section id to road id."""
    reqs = []
    for c in clusters.clusters:
        if not c.representative_ids:
            raise ValidationError(f"cluster {c.id} has no representatives")
        for sid in c.representative_ids:
            if sid not in section_roads:
                raise ValidationError(f"representative {sid} of {c.id} is not a known section")
            reqs.append(CoverageRequirement(sid, c.id, section_roads[sid]))
    return reqs


def split_suite(tests: Sequence[str], requirements: Sequence[CoverageRequirement]) -> SuiteSplit:
    """Tests owning a representative section go to ``covered`` in first-satisfied order."""
    known = set(tests)
    covered: List[str] = []
    coverage: Dict[str, List[str]] = {}
    for req in requirements:
        if req.road_id not in known:
            raise OrphanRequirement(f"section {req.section_id} belongs to unknown test {req.road_id}")
        if req.road_id not in coverage:
            covered.append(req.road_id)
            coverage[req.road_id] = []
        coverage[req.road_id].append(req.section_id)
    chosen = set(covered)
    surplus = [t for t in tests if t not in chosen]
    return SuiteSplit(covered, surplus, coverage)
