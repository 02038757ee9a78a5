import csv
import dataclasses
import json
from pathlib import Path

import pytest

from roadprio import io as rio
from roadprio.cli import main
from roadprio.geometry import Road
from roadprio.synth import SynthCampaignSpec, generate_campaign

TEMPLATES = [
    {"id": "S40", "shape": "straight", "length": 40},
    {"id": "S25", "shape": "straight", "length": 25},
    {"id": "L50", "shape": "left", "radius": 50, "arc_angle_deg": 60},
    {"id": "L30", "shape": "left", "radius": 30, "arc_angle_deg": 90},
    {"id": "R35", "shape": "right", "radius": 35, "arc_angle_deg": 80},
    {"id": "R55", "shape": "right", "radius": 55, "arc_angle_deg": 60},
]


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def campaign(tmp_path):
    """Eight single-template roads, five copies each, no noise."""
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "templates": TEMPLATES,
        "roads": [["S40"], ["L50"], ["L30"], ["R35"], ["R55"], ["S25", "L50"], ["S40", "R35"],
                  ["S25", "L30", "S40"]],
        "duplicate_factor": 5,
        "copy_speed_step": 1.0,
        "failure_rule": {"kind": "radius_below", "value": 40},
    }))
    out = tmp_path / "camp"
    assert run("synth", spec, "--out", out) == 0
    return out


@pytest.fixture
def four_roads(tmp_path):
    """R1..R4 where R3 is the most demanding road and owns representatives with R1."""
    layouts = {"R1": ["S40", "L50"], "R2": ["S40"], "R3": ["S25", "L30", "R35"], "R4": ["S40", "R55"]}
    spec = SynthCampaignSpec.from_dict({"templates": TEMPLATES, "roads": list(layouts.values())})
    synth = generate_campaign(spec)
    rename = {f"R{i:03d}": rid for i, rid in enumerate(layouts)}
    roads = [Road(rename[r.id], r.points, r.config) for r in synth.roads]
    telemetry = [dataclasses.replace(s, test_id=rename[s.test_id]) for s in synth.telemetry]
    d = tmp_path / "fig"
    d.mkdir()
    rio.write_json(d / "roads.json", rio.roads_document("four", roads))
    (d / "telemetry.csv").write_text(rio.telemetry_csv(telemetry))
    assert run("segment", d / "roads.json", "--out", d / "sections.jsonl") == 0
    rio.write_json(d / "clusters.json", {
        "clusters": [
            {"id": "left-000", "shape": "left", "members": ["R1:S01", "R3:S01"],
             "representatives": ["R3:S01", "R1:S01"]},
            {"id": "right-000", "shape": "right", "members": ["R3:S02", "R4:S01"],
             "representatives": ["R3:S02"]},
            {"id": "straight-000", "shape": "straight",
             "members": ["R1:S00", "R2:S00", "R3:S00", "R4:S00"],
             "representatives": ["R1:S00", "R3:S00"]},
        ],
        "params": {"w_dyn": 0.5, "cut_rule": "mean"},
    })
    return d


def select_args(d, **extra):
    args = ["select", "--roads", d / "roads.json", "--sections", d / "sections.jsonl",
            "--clusters", d / "clusters.json", "--telemetry", d / "telemetry.csv",
            "--split-out", d / "split.json", "--ranking-out", d / "ranking.csv"]
    for k, v in extra.items():
        args += ["--" + k.replace("_", "-"), v]
    return args


def ranking(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSegment:
    def test_ok_and_idempotent(self, campaign, tmp_path):
        assert run("segment", campaign / "roads.json", "--out", tmp_path / "a.jsonl") == 0
        assert run("segment", campaign / "roads.json", "--out", tmp_path / "b.jsonl") == 0
        assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

    def test_malformed_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run("segment", bad, "--out", tmp_path / "s.jsonl") == 2
        assert "parse error" in capsys.readouterr().err

    def test_two_point_road(self, tmp_path, capsys):
        doc = {"tests": [{"id": "x", "road": {"points": [[0, 0], [1, 0]]}}]}
        (tmp_path / "r.json").write_text(json.dumps(doc))
        assert run("segment", tmp_path / "r.json", "--out", tmp_path / "s.jsonl") == 3
        assert "RoadTooShort" in capsys.readouterr().err

    def test_bad_arguments(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run("segment")
        assert exc.value.code == 2


class TestCluster:
    def _cluster(self, campaign, out, *extra):
        return run("cluster", "--sections", campaign / "sections.jsonl",
                   "--telemetry", campaign / "telemetry.csv", "--out", out, *extra)

    def test_geometry_only_clusters_by_template(self, campaign, tmp_path):
        run("segment", campaign / "roads.json", "--out", campaign / "sections.jsonl")
        out = tmp_path / "clusters.json"
        assert self._cluster(campaign, out, "--w-dyn", "0", "--emit-matrix") == 0
        doc = rio.read_json(out)
        assert doc["params"]["w_dyn"] == 0.0
        # 6 distinct template shapes, each may split at most by sub-slice mode
        assert len(doc["clusters"]) <= len(TEMPLATES)
        assert sorted(p.name for p in tmp_path.glob("clusters.matrix.*.csv")) == [
            "clusters.matrix.left.csv", "clusters.matrix.right.csv", "clusters.matrix.straight.csv"]

    def test_threads_do_not_change_output(self, campaign, tmp_path):
        run("segment", campaign / "roads.json", "--out", campaign / "sections.jsonl")
        assert self._cluster(campaign, tmp_path / "one.json", "--threads", "1") == 0
        assert self._cluster(campaign, tmp_path / "four.json", "--threads", "4") == 0
        assert (tmp_path / "one.json").read_bytes() == (tmp_path / "four.json").read_bytes()

    def test_flag_beats_config(self, campaign, tmp_path):
        run("segment", campaign / "roads.json", "--out", campaign / "sections.jsonl")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"w_dyn": 0.3, "cut_rule": "mean_plus_half_std"}))
        assert self._cluster(campaign, tmp_path / "c.json", "--config", cfg, "--w-dyn", "0.7") == 0
        params = rio.read_json(tmp_path / "c.json")["params"]
        assert params == {"w_dyn": 0.7, "cut_rule": "mean_plus_half_std", "max_reps": 3}

    def test_unknown_config_key(self, campaign, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"wdyn": 0.3}))
        run("segment", campaign / "roads.json", "--out", campaign / "sections.jsonl")
        assert self._cluster(campaign, tmp_path / "c.json", "--config", cfg) == 3

    def test_empty_sections(self, campaign, tmp_path):
        (campaign / "sections.jsonl").write_text("")
        assert self._cluster(campaign, tmp_path / "c.json") == 3


class TestSelect:
    def test_covered_roads_ranked(self, four_roads):
        assert run(*select_args(four_roads)) == 0
        split = rio.read_json(four_roads / "split.json")
        assert split["covered"] == ["R3", "R1"]
        assert split["surplus"] == ["R2", "R4"]
        rows = ranking(four_roads / "ranking.csv")
        assert [r["test_id"] for r in rows[:2]] == ["R3", "R1"]
        assert [r["group"] for r in rows] == ["cov", "cov", "surplus", "surplus"]
        assert float(rows[0]["p"]) > float(rows[1]["p"])

    def test_missing_history(self, four_roads, caplog):
        assert run(*select_args(four_roads, history=four_roads / "nope.csv")) == 0
        assert all(float(r["h"]) == 0.0 for r in ranking(four_roads / "ranking.csv"))
        assert "not found" in caplog.text

    def test_history_bonus(self, four_roads):
        (four_roads / "hist.csv").write_text("test_id,failed,oob_count\nR2,1,1\n")
        assert run(*select_args(four_roads, history=four_roads / "hist.csv")) == 0
        rows = {r["test_id"]: r for r in ranking(four_roads / "ranking.csv")}
        assert float(rows["R2"]["h"]) == 0.25

    def test_ties_by_ascending_id(self, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({"templates": TEMPLATES, "roads": [["S25", "L50"]],
                                    "duplicate_factor": 4}))
        assert run("synth", spec, "--out", tmp_path) == 0
        assert run("segment", tmp_path / "roads.json", "--out", tmp_path / "sections.jsonl") == 0
        assert run("cluster", "--sections", tmp_path / "sections.jsonl", "--telemetry",
                   tmp_path / "telemetry.csv", "--out", tmp_path / "clusters.json") == 0
        assert run(*select_args(tmp_path)) == 0
        rows = ranking(tmp_path / "ranking.csv")
        assert len({r["p"] for r in rows}) == 1
        # low, median and high of four identical members are copies 0, 1 and 3
        assert [(r["group"], r["test_id"]) for r in rows] == [
            ("cov", "R000-0"), ("cov", "R000-1"), ("cov", "R000-3"), ("surplus", "R000-2")]

    def test_orphan_requirement(self, four_roads):
        doc = rio.load_roads(four_roads / "roads.json")[1]
        rio.write_json(four_roads / "roads.json", rio.roads_document("four", doc[:2]))
        assert run(*select_args(four_roads)) == 3

    def test_prioritize_alias(self, four_roads):
        args = select_args(four_roads)
        args[0] = "prioritize"
        assert run(*args) == 0


class TestEvaluate:
    def _ranking(self, d, n):
        (d / "ranking.csv").write_text("position,group,test_id,g,d,h,p\n" + "".join(
            f"{i + 1},{'cov' if i < 2 else 'surplus'},t{i},0,0,0,0\n" for i in range(n)))

    def test_no_failures_gives_dashes(self, tmp_path):
        self._ranking(tmp_path, 12)
        (tmp_path / "out.csv").write_text("test_id,failed,oob_count\n" + "".join(
            f"t{i},0,0\n" for i in range(12)))
        assert run("evaluate", "--ranking", tmp_path / "ranking.csv", "--outcomes",
                   tmp_path / "out.csv", "--out", tmp_path / "rep.json",
                   "--csv", tmp_path / "row.csv") == 0
        (row,) = ranking(tmp_path / "row.csv")
        assert row["frr_pct"] == "-" and row["apfd"] == "-"
        assert rio.read_json(tmp_path / "rep.json")["frr_pct"] is None

    def test_k_exceeds_suite(self, tmp_path):
        self._ranking(tmp_path, 5)
        (tmp_path / "out.csv").write_text("test_id,failed,oob_count\nt0,1,1\n")
        assert run("evaluate", "--ranking", tmp_path / "ranking.csv", "--outcomes",
                   tmp_path / "out.csv", "--out", tmp_path / "rep.json") == 3

    def test_bad_outcomes_header(self, tmp_path):
        self._ranking(tmp_path, 12)
        (tmp_path / "out.csv").write_text("id,failed\nt0,1\n")
        assert run("evaluate", "--ranking", tmp_path / "ranking.csv", "--outcomes",
                   tmp_path / "out.csv", "--out", tmp_path / "rep.json") == 2


def test_staged_run_matches_report(campaign, tmp_path):
    c = campaign
    assert run("segment", c / "roads.json", "--out", c / "sections.jsonl") == 0
    assert run("cluster", "--sections", c / "sections.jsonl", "--telemetry", c / "telemetry.csv",
               "--out", c / "clusters.json") == 0
    assert run(*select_args(c)) == 0
    assert run("evaluate", "--ranking", c / "ranking.csv", "--outcomes", c / "outcomes.csv",
               "--out", c / "eval.json", "--csv", c / "row.csv") == 0
    rep = tmp_path / "report"
    assert run("report", "--roads", c / "roads.json", "--telemetry", c / "telemetry.csv",
               "--outcomes", c / "outcomes.csv", "--out-dir", rep) == 0
    assert sorted(p.name for p in rep.iterdir()) == [
        "clusters.json", "evaluation.json", "ranking.csv", "sections.jsonl", "split.json",
        "table.csv"]
    assert (rep / "sections.jsonl").read_bytes() == (c / "sections.jsonl").read_bytes()
    staged = rio.read_json(c / "eval.json")
    assert staged["total_tests"] == 40 and staged["failed_tests"] == 20


def test_synth_writes_three_files(campaign):
    assert sorted(p.name for p in Path(campaign).iterdir()) == [
        "outcomes.csv", "roads.json", "telemetry.csv"]


def test_synth_seed_flag(tmp_path):
    (tmp_path / "s.json").write_text(json.dumps({
        "templates": TEMPLATES, "roads": [["L50"]], "telemetry_noise": {"speed": 0.1}, "seed": 1}))
    for name, extra in (("a", []), ("b", ["--seed", "1"]), ("c", ["--seed", "2"])):
        assert run("synth", tmp_path / "s.json", "--out", tmp_path / name, *extra) == 0
    tel = {n: (tmp_path / n / "telemetry.csv").read_bytes() for n in "abc"}
    assert tel["a"] == tel["b"] != tel["c"]


def test_synth_invalid_spec(tmp_path):
    (tmp_path / "s.json").write_text(json.dumps({"templates": [], "roads": [["x"]]}))
    assert run("synth", tmp_path / "s.json", "--out", tmp_path / "o") == 3
