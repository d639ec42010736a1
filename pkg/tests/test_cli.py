import csv
import json
import re

import pytest

from roadlabel.cli import main
from roadlabel.evaluate import CSV_COLUMNS, RunReport, evaluate, evaluate_graph
from roadlabel.labelcore import Label, Labeling, validate_labeling
from roadlabel.render import svg_document
from roadlabel.roadgraph import GraphBuilder, RoadGraph
from roadlabel.solvers import Budget, solve
from roadlabel.synth import oracle_instance


def witness():
    b = GraphBuilder()
    r = b.road("Main & Co", 6.0)
    b.section([(0, 0), (3, 0)], r)
    b.junction([(3, 0), (5, 0)], r)
    b.section([(5, 0), (8, 0)], r)
    return b.build()


@pytest.fixture
def grid_input(tmp_path):
    path = tmp_path / "grid.geojson"
    assert main(["generate", "--kind", "grid", "--size", "2", "--seed", "1", "--out", str(path)]) == 0
    return path


class TestRender:
    def test_empty_labeling_draws_roads_only(self):
        svg = svg_document(witness(), Labeling())
        assert "<textPath" not in svg
        assert svg.count("<path ") == 2 * 3

    def test_one_label_one_text_path(self):
        g = witness()
        lab = solve(g, "milp")
        assert len(lab.labels) == 1
        svg = svg_document(g, lab)
        assert svg.count("<textPath") == 1
        assert "Main &amp; Co" in svg

    def test_label_reads_left_to_right(self):
        g = witness()
        (label,) = solve(g, "milp").labels
        flipped = Label(label.road, tuple(reversed(label.path)), label.tail, label.head)
        svg = svg_document(g, Labeling([flipped]))
        d = re.search(r'<path id="label0" d="M([-\d.]+),[-\d.]+ .* L([-\d.]+),[-\d.]+"', svg)
        assert float(d.group(1)) < float(d.group(2))

    def test_deterministic(self):
        g = oracle_instance("organic", 4)
        lab = solve(g, "tree")
        assert svg_document(g, lab) == svg_document(RoadGraph.from_dict(g.to_dict()), Labeling.from_dict(lab.to_dict()))


class TestEvaluate:
    def test_witness_ratio(self):
        rep = evaluate_graph(witness(), ["baseline", "milp"], "witness")
        assert rep.ratios()["witness"]["baseline/milp"] == 0.0
        assert rep.count("witness", "milp") == 2

    def test_tree_matches_exact_on_tree(self):
        rep = evaluate_graph(oracle_instance("tree", 3), ["tree", "milp"], "t")
        assert rep.ratios()["t"]["tree/milp"] == 1.0

    def test_budget_flags_row(self):
        rep = evaluate_graph(oracle_instance("grid", 0), ["baseline", "milp"], "g", budget=Budget(node_limit=0))
        row = [r for r in rep.rows if r.algorithm == "milp"][0]
        assert row.status == "budget" and row.proven_optimal is False
        assert rep.chain_violations() == []

    def test_solver_error_flags_row(self, monkeypatch):
        import roadlabel.evaluate as ev

        def boom(g, algo, budget=None):
            raise RuntimeError("solver exploded")

        monkeypatch.setattr(ev, "solve", boom)
        rep = ev.evaluate_graph(witness(), ["tree"], "w")
        assert rep.rows[0].status.startswith("error")

    def test_chain_violation_reported(self):
        from roadlabel.evaluate import Row

        rep = RunReport([Row("x", 16, "baseline", 3, 3, 3, 3, 0.0), Row("x", 16, "tree", 3, 3, 2, 2, 0.0)])
        assert rep.chain_violations() == ["x: baseline=3 exceeds tree=2"]

    def test_csv_schema(self):
        rep = evaluate_graph(witness(), ["baseline", "tree"], "w", zoom=16)
        rows = list(csv.reader(rep.to_csv(timing=False).splitlines()))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert rows[1] == ["w", "16", "baseline", "2", "2", "0", "0", ""]

    def test_segments_run_phase1_once(self):
        from roadlabel.synth import generate_instance

        rep = evaluate(generate_instance("grid", 2, 0), ["baseline", "tree"], "g")
        assert rep.phase1["segments_in"] == 12
        totals = {r.sections_total for r in rep.rows}
        assert len(totals) == 1


class TestCommands:
    def test_full_pipeline(self, tmp_path, grid_input):
        graph = tmp_path / "g.json"
        lab = tmp_path / "l.json"
        svg = tmp_path / "m.svg"
        assert main(["preprocess", str(grid_input), "--zoom", "17", "--out", str(graph)]) == 0
        assert main(["label", str(graph), "--algorithm", "tree", "--out", str(lab)]) == 0
        assert main(["render", str(graph), str(lab), "--out", str(svg)]) == 0
        g = RoadGraph.load(graph)
        labeling = Labeling.load(lab)
        assert validate_labeling(g, labeling) == []
        assert svg.read_text().count("<textPath") == len(labeling.labels)

    def test_label_straight_from_input(self, tmp_path, grid_input):
        out = tmp_path / "l.json"
        assert main(["label", str(grid_input), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["meta"]["algorithm"] == "dnc-tree"

    def test_evaluate_outputs(self, tmp_path, grid_input):
        prefix = tmp_path / "stats"
        code = main(["evaluate", str(grid_input), "--algorithm", "baseline", "--algorithm", "tree",
                     "--algorithm", "milp", "--out", str(prefix)])
        assert code == 0
        data = json.loads((tmp_path / "stats.json").read_text())
        assert data["chain_violations"] == []
        assert "baseline/milp" in data["ratios"]["grid"]
        assert data["phase1"]["grid"]["segments_in"] == 12
        header = (tmp_path / "stats.csv").read_text().splitlines()[0]
        assert header == ",".join(CSV_COLUMNS)

    def test_evaluate_without_timing_is_stable(self, tmp_path, grid_input):
        outs = []
        for k in range(2):
            prefix = tmp_path / f"s{k}"
            assert main(["evaluate", str(grid_input), "--no-timing", "--out", str(prefix)]) == 0
            outs.append(((tmp_path / f"s{k}.csv").read_bytes(), (tmp_path / f"s{k}.json").read_bytes()))
        assert outs[0] == outs[1]

    def test_missing_file(self, tmp_path, caplog):
        assert main(["preprocess", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o.json")]) == 2

    def test_bad_input(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["label", str(bad), "--out", str(tmp_path / "o.json")]) == 2

    def test_segments_format(self, tmp_path):
        out = tmp_path / "s.json"
        assert main(["generate", "--format", "segments", "--size", "2", "--seed", "1", "--out", str(out)]) == 0
        assert len(json.loads(out.read_text())["segments"]) == 12

    def test_unknown_algorithm_rejected(self, tmp_path, grid_input):
        with pytest.raises(SystemExit):
            main(["label", str(grid_input), "--algorithm", "magic", "--out", str(tmp_path / "o.json")])
