"""Reduction, retention, early-fault-detection and APFD metrics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import AbstractSet, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import EmptySuite, NoFailures, ValidationError

TABLE_COLUMNS = (
    "campaign", "total", "failed", "selected", "reduction_pct", "frr_pct",
    "efd_rnd_pct", "efd10_pct", "efd10_rnd_pct", "apfd",
)


def reduction_ratio(total: int, selected: int) -> float:
    if total <= 0:
        raise EmptySuite("reduction ratio of an empty suite")
    if not 0 <= selected <= total:
        raise ValidationError(f"selected={selected} outside [0, {total}]")
    return 100.0 * (total - selected) / total


def failed_retention(selected: Iterable[str], failures: AbstractSet[str]) -> float:
    if not failures:
        raise NoFailures("no failed tests; retention is undefined")
    return 100.0 * len(set(selected) & failures) / len(failures)


def efd_at_k(order: Sequence[str], failures: AbstractSet[str], k: int) -> float:
    if not failures:
        raise NoFailures("no failed tests; EFD is undefined")
    if not 0 <= k <= len(order):
        raise ValidationError(f"k={k} outside [0, {len(order)}]")
    return 100.0 * sum(1 for t in order[:k] if t in failures) / len(failures)


def efd_random(n: int, m: int, k: int, trials: int = 10_000, seed: int = 0) -> Tuple[float, float]:
    """Analytic and Monte Carlo EFD@k of a uniformly random order.

    Returns ``(100 k / n, mean over seeded shuffles)``.
    """
    if m <= 0:
        raise NoFailures("no failed tests; EFD is undefined")
    if not (m <= n and 0 <= k <= n):
        raise ValidationError(f"need m <= n and k <= n, got n={n} m={m} k={k}")
    expected = 100.0 * k / n
    rng = np.random.default_rng(seed)
    hits = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        # failures occupy positions 0..m-1 before shuffling
        hits[t] = np.count_nonzero(rng.permutation(n)[:k] < m)
    return expected, 100.0 * float(hits.sum()) / (trials * m)


def apfd(order: Sequence[str], failures: AbstractSet[str]) -> float:
    """APFD with one fault per failed test."""
    if not failures:
        raise NoFailures("no failed tests; APFD is undefined")
    n, m = len(order), len(failures)
    pos = {t: i + 1 for i, t in enumerate(order)}
    missing = failures - pos.keys()
    if missing:
        raise ValidationError(f"failed tests missing from the order: {sorted(missing)}")
    tf = sum(pos[t] for t in failures)
    return 1.0 - tf / (n * m) + 1.0 / (2 * n)


@dataclass
class OverlapReport:
    failures_a: List[str]
    failures_b: List[str]
    intersection_size: int
    union_size: int
    jaccard_pct: float


def cross_model_overlap(failures_a: AbstractSet[str], failures_b: AbstractSet[str]) -> OverlapReport:
    inter = len(failures_a & failures_b)
    union = len(failures_a | failures_b)
    return OverlapReport(sorted(failures_a), sorted(failures_b), inter, union,
                         100.0 * inter / union if union else 0.0)


@dataclass
class EvaluationReport:
    campaign: str
    total_tests: int
    failed_tests: int
    selected_count: int
    reduction_pct: float
    frr_pct: Optional[float]
    efd_at_k: Dict[str, float] = field(default_factory=dict)
    efd_random_expected: Dict[str, float] = field(default_factory=dict)
    efd_random_monte_carlo: Dict[str, float] = field(default_factory=dict)
    apfd: Optional[float] = None
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def table_row(self, k: int = 10) -> Dict[str, str]:
        """One summary CSV row; metrics undefined without failures print as '-'."""
        sel = str(self.selected_count)

        def pct(v: Optional[float]) -> str:
            return "-" if v is None else f"{v:.2f}"

        return {
            "campaign": self.campaign,
            "total": str(self.total_tests),
            "failed": str(self.failed_tests),
            "selected": sel,
            "reduction_pct": f"{round(self.reduction_pct):d}",
            "frr_pct": pct(self.frr_pct),
            "efd_rnd_pct": pct(self.efd_random_expected.get(sel)),
            "efd10_pct": pct(self.efd_at_k.get(str(k))),
            "efd10_rnd_pct": pct(self.efd_random_expected.get(str(k))),
            "apfd": "-" if self.apfd is None else f"{self.apfd:.4f}",
        }


def evaluate(order: Sequence[str], selected: Sequence[str], failures: AbstractSet[str],
             campaign: str = "campaign", k: int = 10, trials: int = 10_000,
             seed: int = 0) -> EvaluationReport:
    """Metrics of a ranked order whose first ``len(selected)`` tests are the covered group."""
    n = len(order)
    if k > n:
        raise ValidationError(f"k={k} exceeds the suite size {n}")
    failures = set(failures) & set(order)
    report = EvaluationReport(
        campaign=campaign,
        total_tests=n,
        failed_tests=len(failures),
        selected_count=len(selected),
        reduction_pct=reduction_ratio(n, len(selected)),
        frr_pct=None,
        seed=seed,
    )
    if not failures:
        return report
    report.frr_pct = failed_retention(selected, failures)
    for kk in sorted({k, len(selected)}):
        report.efd_at_k[str(kk)] = efd_at_k(order, failures, kk)
        exp, mc = efd_random(n, len(failures), kk, trials, seed)
        report.efd_random_expected[str(kk)] = exp
        report.efd_random_monte_carlo[str(kk)] = mc
    report.apfd = apfd(order, failures)
    return report
