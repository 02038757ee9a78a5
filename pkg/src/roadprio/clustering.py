"""Hybrid distance matrices, complete-linkage agglomeration and representatives."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from .dynamics import DynamicProfile, dynamic_distance
from .errors import ShapeMismatch, ValidationError
from .geometry import Section, ShapeLabel
from .similarity import SimilarityParams, geometric_distance

MAX_REPS = 3


@dataclass(frozen=True)
class CutRule:
    """Stopping threshold for agglomeration.

    ``kind`` is ``mean`` (mean off-diagonal distance), ``mean_plus_half_std`` or
    ``fixed`` (uses ``value``).
    """

    kind: str = "mean"
    value: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("mean", "mean_plus_half_std", "fixed"):
            raise ValidationError(f"unknown cut rule {self.kind!r}")

    def threshold(self, values: Sequence[float]) -> float:
        if self.kind == "fixed":
            return self.value
        if not values:
            return 0.0
        mean = math.fsum(values) / len(values)
        if self.kind == "mean":
            return mean
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))
        return mean + 0.5 * std

    def to_json(self):
        return {"fixed": self.value} if self.kind == "fixed" else self.kind

    @classmethod
    def parse(cls, spec) -> "CutRule":
        if isinstance(spec, CutRule):
            return spec
        if isinstance(spec, dict):
            return cls("fixed", float(spec["fixed"]))
        spec = str(spec)
        if spec.startswith("fixed:"):
            return cls("fixed", float(spec.split(":", 1)[1]))
        return cls(spec)


@dataclass(frozen=True)
class ClusteringParams:
    w_dyn: float = 0.5
    cut_rule: CutRule = CutRule()
    max_reps: int = MAX_REPS

    def __post_init__(self) -> None:
        if not 0 <= self.w_dyn <= 1:
            raise ValidationError("w_dyn must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {"w_dyn": self.w_dyn, "cut_rule": self.cut_rule.to_json(), "max_reps": self.max_reps}


@dataclass(frozen=True)
class DistanceMatrix:
    ids: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        v = self.values
        n = len(self.ids)
        if v.shape != (n, n):
            raise ValidationError(f"matrix shape {v.shape} does not match {n} ids")
        if n and (np.any(np.diag(v) != 0) or not np.array_equal(v, v.T)
                  or v.min() < 0 or v.max() > 1):
            raise ValidationError("distance matrix must be symmetric, zero-diagonal, in [0, 1]")


@dataclass
class Cluster:
    id: str
    shape: ShapeLabel
    member_section_ids: List[str]
    representative_ids: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "shape": self.shape.value,
            "members": list(self.member_section_ids),
            "representatives": list(self.representative_ids),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Cluster":
        return cls(str(d["id"]), ShapeLabel(d["shape"]), [str(m) for m in d["members"]],
                   [str(r) for r in d.get("representatives", [])])


@dataclass
class ClusterSet:
    clusters: List[Cluster]
    params_used: ClusteringParams

    def to_dict(self) -> dict:
        return {"clusters": [c.to_dict() for c in self.clusters],
                "params": self.params_used.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterSet":
        p = d.get("params", {})
        params = ClusteringParams(w_dyn=float(p.get("w_dyn", 0.5)),
                                  cut_rule=CutRule.parse(p.get("cut_rule", "mean")))
        return cls([Cluster.from_dict(c) for c in d["clusters"]], params)


def hybrid_distance(p: Section, q: Section, dp: DynamicProfile, dq: DynamicProfile,
                    params: ClusteringParams = ClusteringParams(),
                    simparams: SimilarityParams = SimilarityParams()) -> float:
    if p.shape is not q.shape:
        raise ShapeMismatch(f"{p.id} is {p.shape.value}, {q.id} is {q.shape.value}")
    # straights share their shape entirely; only dynamics separate them
    geom = 0.0 if p.shape is ShapeLabel.STRAIGHT else geometric_distance(p, q, simparams).value
    w = params.w_dyn
    if w == 0:
        return geom
    return (1.0 - w) * geom + w * dynamic_distance(dp, dq)


def build_matrix(sections: Sequence[Section], profiles: Mapping[str, DynamicProfile],
                 params: ClusteringParams = ClusteringParams(),
                 simparams: SimilarityParams = SimilarityParams(),
                 threads: int = 1) -> DistanceMatrix:
    """Pairwise hybrid distances for one shape type, ids in sorted order.

    Each pair is evaluated with its arguments in id order, so the matrix is the
    same whatever the input order or thread count.
    """
    ordered = sorted(sections, key=lambda s: s.id)
    n = len(ordered)
    values = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def work(ij):
        i, j = ij
        a, b = ordered[i], ordered[j]
        return hybrid_distance(a, b, profiles[a.id], profiles[b.id], params, simparams)

    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, pairs, chunksize=max(1, len(pairs) // (threads * 8))))
    else:
        results = [work(ij) for ij in pairs]
    for (i, j), d in zip(pairs, results):
        d = min(1.0, max(0.0, d))
        values[i, j] = values[j, i] = d
    return DistanceMatrix(tuple(s.id for s in ordered), values)


def agglomerate(matrix: DistanceMatrix, params: ClusteringParams = ClusteringParams()) -> List[List[str]]:
    """Complete-linkage agglomeration stopped at the cut threshold.

    A cluster is keyed by its smallest member id. Merges happen while the closest
    pair is within the threshold; equal distances go to the lexicographically
    smallest key pair. Returns sorted member lists ordered by first member.
    """
    ids = list(matrix.ids)
    n = len(ids)
    if n == 0:
        return []
    off = [float(matrix.values[i, j]) for i in range(n) for j in range(i + 1, n)]
    cut = params.cut_rule.threshold(off)

    members: Dict[str, List[str]] = {sid: [sid] for sid in ids}
    # linkage[a][b] for keys a < b
    link: Dict[Tuple[str, str], float] = {}
    for i, a in enumerate(ids):
        for j, b in enumerate(ids):
            if a < b:
                link[(a, b)] = float(matrix.values[i, j])

    while len(members) > 1:
        (a, b), d = min(link.items(), key=lambda kv: (kv[1], kv[0]))
        if d > cut:
            break
        keep, gone = a, b  # a < b, so the merged key stays the smaller one
        members[keep] = sorted(members[keep] + members.pop(gone))
        del link[(keep, gone)]
        for other in members:
            if other == keep:
                continue
            k_keep = (keep, other) if keep < other else (other, keep)
            k_gone = (gone, other) if gone < other else (other, gone)
            link[k_keep] = max(link[k_keep], link.pop(k_gone))
    return sorted(members.values(), key=lambda m: m[0])


def select_representatives(cluster: Cluster, sections: Mapping[str, Section],
                           max_reps: int = MAX_REPS) -> Cluster:
    """Fill ``representative_ids``: every member for small clusters, otherwise the
    low, (lower) median and high member by mean |curvature| (arc length for straights).
    """
    members = sorted(cluster.member_section_ids)
    if len(members) <= max_reps:
        reps = members
    else:
        if cluster.shape is ShapeLabel.STRAIGHT:
            key = lambda sid: (sections[sid].arc_length, sid)
        else:
            key = lambda sid: (sections[sid].mean_abs_curvature, sid)
        ranked = sorted(members, key=key)
        picks = (0, (len(ranked) - 1) // 2, len(ranked) - 1)
        reps = [ranked[i] for i in picks]
    return Cluster(cluster.id, cluster.shape, members, list(reps))


def cluster_sections(sections: Sequence[Section], profiles: Mapping[str, DynamicProfile],
                     params: ClusteringParams = ClusteringParams(),
                     simparams: SimilarityParams = SimilarityParams(),
                     threads: int = 1) -> Tuple[ClusterSet, Dict[ShapeLabel, DistanceMatrix]]:
    """Cluster each shape type separately and pick representatives."""
    by_id = {s.id: s for s in sections}
    clusters: List[Cluster] = []
    matrices: Dict[ShapeLabel, DistanceMatrix] = {}
    for shape in sorted(ShapeLabel):
        group = [s for s in sections if s.shape is shape]
        if not group:
            continue
        matrix = build_matrix(group, profiles, params, simparams, threads)
        matrices[shape] = matrix
        for k, mem in enumerate(agglomerate(matrix, params)):
            c = Cluster(f"{shape.value}-{k:03d}", shape, mem)
            clusters.append(select_representatives(c, by_id, params.max_reps))
    return ClusterSet(clusters, params), matrices
