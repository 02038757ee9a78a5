"""Pipeline configuration: every tunable parameter with its default."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Dict, Mapping, Optional

from .clustering import ClusteringParams, CutRule
from .errors import ValidationError
from .geometry import SegmentationParams
from .prioritization import PriorityParams
from .similarity import SimilarityParams


@dataclass(frozen=True)
class PipelineConfig:
    tau_c: float = 0.015
    window_w: int = 3
    min_length: float = 10.0
    tau_len: float = 0.8
    kappa_span: Optional[float] = None  # None: derive from the campaign
    w_dyn: float = 0.5
    cut_rule: Any = "mean"
    alpha: float = 0.5
    beta: float = 0.5
    failure_bonus: float = 0.25
    kappa_thr: float = 0.015
    w_cv: float = 1 / 3
    w_hc: float = 1 / 3
    w_dt: float = 1 / 3
    k: int = 10
    trials: int = 10_000
    seed: int = 0
    threads: int = 1
    paths: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        # constructing the per-module params runs their invariant checks
        self.segmentation()
        self.clustering()
        self.priority()
        if self.kappa_span is not None and not self.kappa_span > 0:
            raise ValidationError("kappa_span must be > 0")
        if not 0 < self.tau_len <= 1:
            raise ValidationError("tau_len must lie in (0, 1]")
        if self.threads < 1:
            raise ValidationError("threads must be >= 1")

    def segmentation(self) -> SegmentationParams:
        return SegmentationParams(self.tau_c, self.window_w, self.min_length)

    def similarity(self, kappa_span: float) -> SimilarityParams:
        return SimilarityParams(self.tau_len, self.kappa_span if self.kappa_span is not None else kappa_span)

    def clustering(self) -> ClusteringParams:
        return ClusteringParams(self.w_dyn, CutRule.parse(self.cut_rule))

    def priority(self) -> PriorityParams:
        return PriorityParams(self.alpha, self.beta, self.failure_bonus, self.kappa_thr,
                              self.w_cv, self.w_hc, self.w_dt)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["cut_rule"] = CutRule.parse(self.cut_rule).to_json()
        return d

    @classmethod
    def from_dict(cls, d: Mapping, **overrides) -> "PipelineConfig":
        """Config file values, then non-None ``overrides`` on top."""
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        merged = dict(d)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**merged)
        except TypeError as exc:
            raise ValidationError(str(exc)) from exc
