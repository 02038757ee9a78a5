"""Readers and writers for the pipeline's interchange files.

All JSON is written canonically: sorted keys, floats rounded to 9 significant
digits, so reruns on unchanged inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence

from .clustering import DistanceMatrix
from .dynamics import TelemetrySample, TestOutcome
from .errors import InputParseError, ValidationError
from .geometry import Point2D, Road, ScenarioConfig, Section
from .prioritization import RankedSuite

TELEMETRY_HEADER = ["test_id", "t", "speed", "steering", "cte", "yaw_rate", "nearest_point_index"]
OUTCOMES_HEADER = ["test_id", "failed", "oob_count"]
RANKING_HEADER = ["position", "group", "test_id", "g", "d", "h", "p"]


def _round(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValidationError(f"cannot serialise non-finite float {obj}")
        r = float(f"{obj:.9g}")
        return 0.0 if r == 0 else r
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def canonical_json(obj, indent: int | None = 2) -> str:
    return json.dumps(_round(obj), sort_keys=True, indent=indent, ensure_ascii=False)


def fmt_float(x: float) -> str:
    return repr(_round(float(x)))


def write_json(path: Path | str, obj) -> None:
    Path(path).write_text(canonical_json(obj) + "\n", encoding="utf-8")


def read_json(path: Path | str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputParseError(f"{path}: {exc}") from exc


# --- roads -----------------------------------------------------------------

def road_to_dict(road: Road) -> dict:
    return {
        "id": road.id,
        "road": {"points": [[p.x, p.y] for p in road.points]},
        "config": {
            "initial_position": [road.config.initial_position.x, road.config.initial_position.y],
            "initial_speed": road.config.initial_speed,
            "extra": dict(road.config.extra),
        },
    }


def road_from_dict(d: Mapping) -> Road:
    try:
        cfg = d.get("config", {}) or {}
        pos = cfg.get("initial_position", [0.0, 0.0])
        config = ScenarioConfig(
            initial_position=Point2D(float(pos[0]), float(pos[1])),
            initial_speed=float(cfg.get("initial_speed", 0.0)),
            extra={str(k): str(v) for k, v in (cfg.get("extra") or {}).items()},
        )
        pts = [(float(x), float(y)) for x, y in d["road"]["points"]]
        tid = str(d["id"])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputParseError(f"malformed test entry: {exc!r}") from exc
    return Road.from_xy(tid, pts, config)


def load_roads(path: Path | str) -> tuple[str, List[Road]]:
    doc = read_json(path)
    if not isinstance(doc, dict) or not isinstance(doc.get("tests"), list):
        raise InputParseError(f"{path}: expected an object with a 'tests' list")
    roads = [road_from_dict(t) for t in doc["tests"]]
    seen = set()
    for r in roads:
        if r.id in seen:
            raise ValidationError(f"duplicate test id {r.id!r}")
        seen.add(r.id)
    return str(doc.get("campaign", "")), roads


def roads_document(campaign: str, roads: Sequence[Road]) -> dict:
    return {"campaign": campaign, "tests": [road_to_dict(r) for r in roads]}


# --- sections --------------------------------------------------------------

def dump_sections(sections: Iterable[Section]) -> str:
    return "".join(canonical_json(s.to_dict(), indent=None) + "\n" for s in sections)


def load_sections(path: Path | str) -> List[Section]:
    out = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputParseError(str(exc)) from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(Section.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InputParseError(f"{path}:{lineno}: {exc}") from exc
    return out


# --- CSV -------------------------------------------------------------------

def _read_csv(path: Path | str, header: Sequence[str]) -> List[Dict[str, str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != list(header):
                raise InputParseError(f"{path}: expected header {','.join(header)}")
            return list(reader)
    except OSError as exc:
        raise InputParseError(str(exc)) from exc


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def load_telemetry(path: Path | str) -> List[TelemetrySample]:
    out = []
    for i, row in enumerate(_read_csv(path, TELEMETRY_HEADER), 2):
        try:
            vals = [float(row[k]) for k in ("t", "speed", "steering", "cte", "yaw_rate")]
            idx = int(row["nearest_point_index"])
        except (TypeError, ValueError) as exc:
            raise InputParseError(f"{path}:{i}: {exc}") from exc
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError(f"{path}:{i}: non-finite telemetry value")
        out.append(TelemetrySample(row["test_id"], *vals, nearest_point_index=idx))
    return out


def telemetry_csv(samples: Iterable[TelemetrySample]) -> str:
    return csv_text(TELEMETRY_HEADER, (
        [s.test_id, fmt_float(s.t), fmt_float(s.speed), fmt_float(s.steering), fmt_float(s.cte),
         fmt_float(s.yaw_rate), s.nearest_point_index] for s in samples))


def load_outcomes(path: Path | str) -> Dict[str, TestOutcome]:
    out = {}
    for i, row in enumerate(_read_csv(path, OUTCOMES_HEADER), 2):
        try:
            failed = row["failed"].strip()
            if failed not in ("0", "1"):
                raise ValueError(f"failed must be 0 or 1, got {failed!r}")
            oob = int(row["oob_count"]) if row["oob_count"].strip() else 0
        except (AttributeError, ValueError) as exc:
            raise InputParseError(f"{path}:{i}: {exc}") from exc
        out[row["test_id"]] = TestOutcome(row["test_id"], failed == "1", oob)
    return out


def outcomes_csv(outcomes: Iterable[TestOutcome]) -> str:
    return csv_text(OUTCOMES_HEADER, ([o.test_id, int(o.failed), o.oob_count] for o in outcomes))


def matrix_csv(matrix: DistanceMatrix) -> str:
    rows = ([sid, *(fmt_float(v) for v in matrix.values[i])] for i, sid in enumerate(matrix.ids))
    return csv_text(["", *matrix.ids], rows)


def ranking_csv(ranked: RankedSuite) -> str:
    rows = []
    pos = 1
    for group, scores in (("cov", ranked.covered_order), ("surplus", ranked.surplus_order)):
        for s in scores:
            rows.append([pos, group, s.test_id, fmt_float(s.g), fmt_float(s.d),
                         fmt_float(s.h), fmt_float(s.p)])
            pos += 1
    return csv_text(RANKING_HEADER, rows)


def load_ranking(path: Path | str) -> List[Dict[str, str]]:
    rows = _read_csv(path, RANKING_HEADER)
    try:
        rows.sort(key=lambda r: int(r["position"]))
    except ValueError as exc:
        raise InputParseError(f"{path}: bad position: {exc}") from exc
    for r in rows:
        if r["group"] not in ("cov", "surplus"):
            raise InputParseError(f"{path}: unknown group {r['group']!r}")
    return rows
