"""In-memory composition of the stages: segment, profile, cluster, select, rank."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .clustering import ClusterSet, DistanceMatrix, cluster_sections
from .config import PipelineConfig
from .dynamics import (DynamicProfile, TelemetrySample, TestOutcome, extract_profile,
                       group_by_test, normalize_mapping, section_profile)
from .errors import ValidationError
from .geometry import CurvatureProfile, Road, Section, ShapeLabel, compute_curvature, segment_road
from .prioritization import (RankedSuite, TestScore, dynamic_score, geometric_score,
                             geometric_score_raw, historical_score, rank)
from .selection import CoverageRequirement, SuiteSplit, build_requirements, split_suite
from .similarity import campaign_kappa_span

log = logging.getLogger(__name__)


def segment_all(roads: Sequence[Road], config: PipelineConfig
                ) -> Tuple[Dict[str, CurvatureProfile], List[Section]]:
    params = config.segmentation()
    profiles: Dict[str, CurvatureProfile] = {}
    sections: List[Section] = []
    for road in roads:
        prof = compute_curvature(road)
        profiles[road.id] = prof
        sections.extend(segment_road(road, params, prof))
    return profiles, sections


def section_dynamics(sections: Sequence[Section], telemetry: Sequence[TelemetrySample]
                     ) -> Dict[str, DynamicProfile]:
    """Normalized per-section profiles over the whole campaign."""
    traces = group_by_test(telemetry)
    raw = {s.id: section_profile(traces.get(s.road_id, []), s) for s in sections}
    return normalize_mapping(raw)


def whole_test_dynamics(test_ids: Sequence[str], telemetry: Sequence[TelemetrySample]
                        ) -> Dict[str, DynamicProfile]:
    traces = group_by_test(telemetry)
    raw = {}
    for t in test_ids:
        trace = traces.get(t, [])
        if len(trace) < 2:
            log.warning("test %s has %d telemetry samples; using a zero profile", t, len(trace))
            raw[t] = DynamicProfile()
        else:
            raw[t] = extract_profile(trace)
    return normalize_mapping(raw)


def cluster_stage(sections: Sequence[Section], telemetry: Sequence[TelemetrySample],
                  config: PipelineConfig) -> Tuple[ClusterSet, Dict[ShapeLabel, DistanceMatrix]]:
    if not sections:
        raise ValidationError("no sections to cluster")
    dyn = section_dynamics(sections, telemetry)
    simparams = config.similarity(campaign_kappa_span(sections))
    return cluster_sections(sections, dyn, config.clustering(), simparams, config.threads)


def score_tests(roads: Sequence[Road], sections: Sequence[Section],
                telemetry: Sequence[TelemetrySample], history: Mapping[str, TestOutcome],
                config: PipelineConfig,
                curvature: Optional[Mapping[str, CurvatureProfile]] = None) -> Dict[str, TestScore]:
    params = config.priority()
    by_road: Dict[str, List[Section]] = {}
    for s in sections:
        by_road.setdefault(s.road_id, []).append(s)
    raw = {}
    for road in roads:
        prof = curvature[road.id] if curvature is not None else compute_curvature(road)
        raw[road.id] = geometric_score_raw(prof, by_road.get(road.id, []), params)
    g = geometric_score(raw, params)
    dyn = whole_test_dynamics([r.id for r in roads], telemetry)
    return {
        r.id: TestScore.combine(r.id, g[r.id], dynamic_score(dyn[r.id]),
                                historical_score(history.get(r.id), params), params)
        for r in roads
    }


def select_stage(roads: Sequence[Road], sections: Sequence[Section], clusters: ClusterSet
                 ) -> Tuple[List[CoverageRequirement], SuiteSplit]:
    reqs = build_requirements(clusters, {s.id: s.road_id for s in sections})
    return reqs, split_suite([r.id for r in roads], reqs)


@dataclass
class PipelineResult:
    sections: List[Section]
    clusters: ClusterSet
    matrices: Dict[ShapeLabel, DistanceMatrix]
    requirements: List[CoverageRequirement]
    split: SuiteSplit
    scores: Dict[str, TestScore]
    ranked: RankedSuite


def run_pipeline(roads: Sequence[Road], telemetry: Sequence[TelemetrySample],
                 history: Optional[Mapping[str, TestOutcome]] = None,
                 config: PipelineConfig = PipelineConfig()) -> PipelineResult:
    curvature, sections = segment_all(roads, config)
    clusters, matrices = cluster_stage(sections, telemetry, config)
    reqs, split = select_stage(roads, sections, clusters)
    scores = score_tests(roads, sections, telemetry, history or {}, config, curvature)
    return PipelineResult(sections, clusters, matrices, reqs, split, scores, rank(split, scores))
