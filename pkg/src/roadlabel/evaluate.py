"""Evaluation harness: one road graph, several algorithms, one report."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .labelcore import Labeling
from .roadgraph import RoadGraph
from .solvers import Budget, solve

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "instance",
    "zoom",
    "algorithm",
    "sections_total",
    "sections_countable",
    "sections_labeled",
    "labels_placed",
    "runtime_ms",
)
# pairs reported as count ratios, numerator first
RATIO_PAIRS = (
    ("baseline", "milp"),
    ("tree", "milp"),
    ("dnc-tree", "milp"),
    ("dnc-milp", "milp"),
    ("baseline", "tree"),
    ("dnc-tree", "tree"),
)
# must be non-decreasing whenever the last one is proven optimal
CHAIN = ("baseline", "tree", "milp")


@dataclass
class Row:
    instance: str
    zoom: int | None
    algorithm: str
    sections_total: int
    sections_countable: int
    sections_labeled: int
    labels_placed: int
    runtime_ms: float
    proven_optimal: bool | None = None
    status: str = "ok"

    def csv_values(self, timing: bool = True) -> list:
        ms = f"{self.runtime_ms:.3f}" if timing else ""
        return [
            self.instance, "" if self.zoom is None else self.zoom, self.algorithm,
            self.sections_total, self.sections_countable, self.sections_labeled, self.labels_placed, ms,
        ]


@dataclass
class RunReport:
    rows: list[Row] = field(default_factory=list)
    phase1: dict | None = None
    labelings: dict[str, Labeling] = field(default_factory=dict, repr=False)

    def count(self, instance: str, algorithm: str) -> int | None:
        for r in self.rows:
            if r.instance == instance and r.algorithm == algorithm and r.status == "ok":
                return r.sections_labeled
        return None

    def instances(self) -> list[str]:
        seen: list[str] = []
        for r in self.rows:
            if r.instance not in seen:
                seen.append(r.instance)
        return seen

    def ratios(self) -> dict[str, dict[str, float | None]]:
        """Labeled-section ratios per instance, computed from the rows."""
        out: dict[str, dict[str, float | None]] = {}
        for inst in self.instances():
            d: dict[str, float | None] = {}
            for a, b in RATIO_PAIRS:
                ca, cb = self.count(inst, a), self.count(inst, b)
                if ca is None or cb is None:
                    continue
                d[f"{a}/{b}"] = ca / cb if cb else (1.0 if ca == 0 else None)
            out[inst] = d
        return out

    def chain_violations(self) -> list[str]:
        """Instances where baseline <= tree <= milp fails although milp is proven."""
        bad = []
        for inst in self.instances():
            counts = [self.count(inst, a) for a in CHAIN]
            proven = any(
                r.instance == inst and r.algorithm == "milp" and r.proven_optimal for r in self.rows
            )
            pairs = list(zip(CHAIN, counts))
            for (a, ca), (b, cb) in zip(pairs, pairs[1:]):
                if ca is None or cb is None:
                    continue
                if b == "milp" and not proven:
                    continue
                if ca > cb:
                    bad.append(f"{inst}: {a}={ca} exceeds {b}={cb}")
        return bad

    def extend(self, other: RunReport) -> None:
        self.rows.extend(other.rows)

    def to_csv(self, timing: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.csv_values(timing))
        return buf.getvalue()

    def to_dict(self, timing: bool = True) -> dict:
        rows = []
        for r in self.rows:
            d = dict(zip(CSV_COLUMNS, r.csv_values(timing)))
            d["runtime_ms"] = r.runtime_ms if timing else None
            d["proven_optimal"] = r.proven_optimal
            d["status"] = r.status
            rows.append(d)
        phase1 = _strip_timing(self.phase1) if self.phase1 and not timing else self.phase1
        return {
            "rows": rows,
            "ratios": self.ratios(),
            "chain_violations": self.chain_violations(),
            "phase1": phase1,
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=1, sort_keys=True) + "\n"

    def save(self, prefix: str | Path, timing: bool = True) -> tuple[Path, Path]:
        prefix = Path(prefix)
        csv_path = prefix.with_suffix(".csv")
        json_path = prefix.with_suffix(".json")
        csv_path.write_text(self.to_csv(timing))
        json_path.write_text(self.to_json(timing))
        return csv_path, json_path


def _strip_timing(d: dict) -> dict:
    """Copy of a (possibly per-instance) Phase 1 report without wall-clock fields."""
    return {k: _strip_timing(v) if isinstance(v, dict) else v for k, v in d.items() if k != "runtime_s"}


def evaluate_graph(
    g: RoadGraph,
    algorithms: list[str],
    instance: str = "instance",
    zoom: int | None = None,
    budget: Budget | None = None,
) -> RunReport:
    """Run every algorithm on ``g``; a solver failure flags its row and the run goes on."""
    report = RunReport()
    total = len(g.sections())
    countable = sum(1 for i in g.edges if g.is_countable(i))
    for algo in algorithms:
        try:
            lab = solve(g, algo, budget)
        except Exception as exc:  # noqa: BLE001 - reported, not fatal
            log.error("%s on %s failed: %s", algo, instance, exc)
            report.rows.append(Row(instance, zoom, algo, total, countable, 0, 0, 0.0, None, f"error: {exc}"))
            continue
        proven = lab.meta.get("proven_optimal")
        status = "ok"
        if proven is False:
            status = "budget"
            log.warning("%s on %s hit its budget; row flagged", algo, instance)
        report.rows.append(
            Row(
                instance, zoom, algo, total, countable,
                lab.meta["objective"], len(lab.labels), lab.meta["runtime_s"] * 1000.0, proven, status,
            )
        )
        report.labelings[algo] = lab
    for v in report.chain_violations():
        log.error("chain inequality violated: %s", v)
    return report


def evaluate(
    source,
    algorithms: list[str],
    instance: str | None = None,
    zoom: int | None = None,
    budget: Budget | None = None,
    phase1=None,
    style=None,
) -> RunReport:
    """Evaluate a road graph, a segment list or an input file.

    Inputs that are not yet a road graph go through the preprocessing
    pipeline once; every algorithm then sees the same graph.
    """
    from .preprocess import Phase1Params, ingest, run_phase1
    from .roadgraph import RoadGraph as _RG

    p1 = None
    if isinstance(source, _RG):
        g = source
    else:
        if isinstance(source, (str, Path)):
            name = instance or Path(source).stem
            data = json.loads(Path(source).read_text())
            if isinstance(data, dict) and "vertices" in data and "edges" in data:
                g = _RG.from_dict(data)
                return evaluate_graph(g, algorithms, name, zoom, budget)
            segments = ingest(source, style)
            instance = name
        else:
            segments = list(source)
        g, rep = run_phase1(segments, phase1 or Phase1Params())
        p1 = rep.to_dict()
    report = evaluate_graph(g, algorithms, instance or "instance", zoom, budget)
    report.phase1 = p1
    return report
