"""Command-line entry point: one subcommand per pipeline stage.

Exit codes: 0 ok, 2 input parse error, 3 validation or pipeline error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import io as rio
from .clustering import ClusterSet
from .config import PipelineConfig
from .errors import InputParseError, ValidationError
from .evaluation import TABLE_COLUMNS, evaluate
from .pipeline import cluster_stage, score_tests, segment_all, select_stage
from .prioritization import rank
from .synth import SynthCampaignSpec, generate_campaign, write_campaign

log = logging.getLogger("roadprio")

EXIT_OK, EXIT_PARSE, EXIT_INVALID = 0, 2, 3

# flag name -> config key
OVERRIDES = {
    "tau_c": float, "window_w": int, "min_length": float, "tau_len": float,
    "kappa_span": float, "w_dyn": float, "cut_rule": str, "alpha": float, "beta": float,
    "failure_bonus": float, "kappa_thr": float, "k": int, "trials": int,
}


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", type=Path, help="JSON config file")
    g.add_argument("--seed", type=int)
    g.add_argument("--threads", type=int)
    g.add_argument("--emit-matrix", action="store_true",
                   help="also write per-shape distance matrices as CSV")
    g.add_argument("-v", "--verbose", action="store_true")
    o = p.add_argument_group("parameter overrides (take precedence over --config)")
    for name, typ in OVERRIDES.items():
        o.add_argument("--" + name.replace("_", "-"), dest=name, type=typ)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="roadprio", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic campaign")
    p.add_argument("spec", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("segment", parents=[common], help="segment roads into sections")
    p.add_argument("roads", type=Path)
    p.add_argument("--out", type=Path, required=True, help="sections JSON lines file")

    p = sub.add_parser("cluster", parents=[common], help="cluster sections")
    p.add_argument("--sections", type=Path, required=True)
    p.add_argument("--telemetry", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="cluster set JSON")

    for name in ("select", "prioritize"):
        p = sub.add_parser(name, parents=[common], help="split the suite and rank tests")
        p.add_argument("--roads", type=Path, required=True)
        p.add_argument("--sections", type=Path, required=True)
        p.add_argument("--clusters", type=Path, required=True)
        p.add_argument("--telemetry", type=Path, required=True)
        p.add_argument("--history", type=Path, help="outcomes CSV of a previous run")
        p.add_argument("--split-out", type=Path, required=True)
        p.add_argument("--ranking-out", type=Path, required=True)

    p = sub.add_parser("evaluate", parents=[common], help="metrics of a ranking")
    p.add_argument("--ranking", type=Path, required=True)
    p.add_argument("--outcomes", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="report JSON")
    p.add_argument("--csv", type=Path, help="one-row summary CSV")
    p.add_argument("--campaign", default="campaign")

    p = sub.add_parser("report", parents=[common], help="run every stage into a directory")
    p.add_argument("--roads", type=Path, required=True)
    p.add_argument("--telemetry", type=Path, required=True)
    p.add_argument("--outcomes", type=Path, help="outcomes of this run, enables evaluation")
    p.add_argument("--history", type=Path)
    p.add_argument("--out-dir", type=Path, required=True)
    return parser


def load_config(args: argparse.Namespace) -> PipelineConfig:
    base = rio.read_json(args.config) if args.config else {}
    if not isinstance(base, dict):
        raise InputParseError(f"{args.config}: config must be a JSON object")
    overrides = {name: getattr(args, name, None) for name in OVERRIDES}
    overrides["seed"] = args.seed
    overrides["threads"] = args.threads
    return PipelineConfig.from_dict(base, **overrides)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_matrices(matrices, out: Path) -> None:
    for shape, m in matrices.items():
        _write_text(out.with_name(f"{out.stem}.matrix.{shape.value}.csv"), rio.matrix_csv(m))


def cmd_synth(args, config: PipelineConfig) -> int:
    spec = SynthCampaignSpec.from_dict(rio.read_json(args.spec))
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    write_campaign(generate_campaign(spec), args.out)
    return EXIT_OK


def cmd_segment(args, config: PipelineConfig) -> int:
    _, roads = rio.load_roads(args.roads)
    _, sections = segment_all(roads, config)
    _write_text(args.out, rio.dump_sections(sections))
    return EXIT_OK


def cmd_cluster(args, config: PipelineConfig) -> int:
    sections = rio.load_sections(args.sections)
    telemetry = rio.load_telemetry(args.telemetry)
    clusters, matrices = cluster_stage(sections, telemetry, config)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    rio.write_json(args.out, clusters.to_dict())
    if args.emit_matrix:
        _write_matrices(matrices, args.out)
    return EXIT_OK


def cmd_select(args, config: PipelineConfig) -> int:
    _, roads = rio.load_roads(args.roads)
    sections = rio.load_sections(args.sections)
    clusters = ClusterSet.from_dict(rio.read_json(args.clusters))
    telemetry = rio.load_telemetry(args.telemetry)
    history = {}
    if args.history is not None:
        if args.history.exists():
            history = rio.load_outcomes(args.history)
        else:
            log.warning("history file %s not found; no test gets a failure bonus", args.history)
    _, split = select_stage(roads, sections, clusters)
    scores = score_tests(roads, sections, telemetry, history, config)
    ranked = rank(split, scores)
    args.split_out.parent.mkdir(parents=True, exist_ok=True)
    rio.write_json(args.split_out, split.to_dict())
    _write_text(args.ranking_out, rio.ranking_csv(ranked))
    return EXIT_OK


def table_csv(rows: Sequence[Dict[str, str]]) -> str:
    return rio.csv_text(TABLE_COLUMNS, ([r[c] for c in TABLE_COLUMNS] for r in rows))


def _evaluate_and_write(order: List[str], selected: List[str], outcomes_path: Path,
                        out: Path, csv_out: Optional[Path], campaign: str,
                        config: PipelineConfig) -> None:
    outcomes = rio.load_outcomes(outcomes_path)
    failures = {t for t, o in outcomes.items() if o.failed}
    report = evaluate(order, selected, failures, campaign=campaign, k=config.k,
                      trials=config.trials, seed=config.seed)
    out.parent.mkdir(parents=True, exist_ok=True)
    rio.write_json(out, report.to_dict())
    if csv_out is not None:
        _write_text(csv_out, table_csv([report.table_row(config.k)]))


def cmd_evaluate(args, config: PipelineConfig) -> int:
    rows = rio.load_ranking(args.ranking)
    order = [r["test_id"] for r in rows]
    selected = [r["test_id"] for r in rows if r["group"] == "cov"]
    _evaluate_and_write(order, selected, args.outcomes, args.out, args.csv, args.campaign, config)
    return EXIT_OK


def cmd_report(args, config: PipelineConfig) -> int:
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    campaign, roads = rio.load_roads(args.roads)
    telemetry = rio.load_telemetry(args.telemetry)
    history = rio.load_outcomes(args.history) if args.history else {}
    curvature, sections = segment_all(roads, config)
    _write_text(out / "sections.jsonl", rio.dump_sections(sections))
    clusters, matrices = cluster_stage(sections, telemetry, config)
    rio.write_json(out / "clusters.json", clusters.to_dict())
    if args.emit_matrix:
        _write_matrices(matrices, out / "clusters.json")
    _, split = select_stage(roads, sections, clusters)
    ranked = rank(split, score_tests(roads, sections, telemetry, history, config, curvature))
    rio.write_json(out / "split.json", split.to_dict())
    _write_text(out / "ranking.csv", rio.ranking_csv(ranked))
    if args.outcomes is not None:
        _evaluate_and_write(ranked.order(), split.covered, args.outcomes, out / "evaluation.json",
                            out / "table.csv", campaign or "campaign", config)
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth, "segment": cmd_segment, "cluster": cmd_cluster,
    "select": cmd_select, "prioritize": cmd_select, "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args)
        return COMMANDS[args.command](args, config)
    except InputParseError as exc:
        print(f"roadprio: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"roadprio: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
