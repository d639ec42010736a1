"""Command line interface: ``roadlabel <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .fonts import DEFAULT_METRICS, FontMetrics
from .labelcore import Labeling
from .preprocess import DEFAULT_MAX_SECTION_PX, DEFAULT_SNAP_TOL, Phase1Params, ingest, run_phase1, segments_to_json
from .roadgraph import RoadGraph
from .solvers import ALGORITHMS, Budget, solve
from .style import StyleConfig
from .wellshape import DEFAULT_ALPHA_MAX

log = logging.getLogger("roadlabel")


def _add_style(p: argparse.ArgumentParser) -> None:
    p.add_argument("--zoom", type=int, default=16, help="zoom level 15, 16 or 17 (default 16)")
    p.add_argument("--style", type=Path, help="style config JSON")
    p.add_argument("--metrics", type=Path, help="font metrics JSON")


def _add_phase1(p: argparse.ArgumentParser) -> None:
    _add_style(p)
    p.add_argument("--alpha-max", type=float, default=DEFAULT_ALPHA_MAX, help="largest bend inside a label, degrees")
    p.add_argument("--lmax-factor", type=float, default=2.0, help="bend window as a multiple of the W width")
    p.add_argument("--delta", type=float, help="junction reach cap in map units (default: 2x widest stroke)")
    p.add_argument(
        "--max-section-length", type=float, default=DEFAULT_MAX_SECTION_PX,
        help="repetition threshold in screen pixels (default 350)",
    )
    p.add_argument("--snap-tol", type=float, default=DEFAULT_SNAP_TOL, help="snapping tolerance in map units")
    p.add_argument("--threads", type=int, default=1)


def _add_solver(p: argparse.ArgumentParser, many: bool = False) -> None:
    if many:
        p.add_argument(
            "--algorithm", action="append", choices=ALGORITHMS,
            help="algorithm to run; repeat for several (default: baseline, tree, dnc-tree, milp)",
        )
    else:
        p.add_argument("--algorithm", choices=ALGORITHMS, default="dnc-tree")
    p.add_argument("--bnb-node-limit", type=int, help="branch-and-bound node budget")
    p.add_argument("--time-limit-s", type=float, help="branch-and-bound time budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roadlabel", description="Label road names along road networks.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic input instance")
    p.add_argument("--kind", choices=("grid", "organic"), default="grid")
    p.add_argument("--size", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--block", type=float, default=100.0, help="block length or ring radius in map units")
    p.add_argument("--format", choices=("geojson", "segments"), default="geojson")
    _add_style(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("preprocess", help="turn input lines into a road graph")
    p.add_argument("input", type=Path)
    _add_phase1(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("label", help="label a road graph or an input file")
    p.add_argument("input", type=Path)
    _add_phase1(p)
    _add_solver(p)
    p.add_argument("--seed", type=int, default=0, help="accepted for symmetry; all algorithms are deterministic")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("evaluate", help="compare algorithms and write CSV and JSON statistics")
    p.add_argument("inputs", type=Path, nargs="+")
    _add_phase1(p)
    _add_solver(p, many=True)
    p.add_argument("--no-timing", action="store_true", help="leave wall-clock columns empty")
    p.add_argument("--out", type=Path, required=True, help="output prefix; .csv and .json are appended")

    p = sub.add_parser("render", help="draw a labeled road graph as SVG")
    p.add_argument("graph", type=Path)
    p.add_argument("labeling", type=Path, nargs="?")
    p.add_argument("--out", type=Path, required=True)
    return parser


def _style(args) -> StyleConfig:
    if args.style:
        return StyleConfig.load(args.style, zoom=args.zoom)
    return StyleConfig(zoom=args.zoom)


def _metrics(args) -> FontMetrics:
    return FontMetrics.load(args.metrics) if args.metrics else DEFAULT_METRICS


def _phase1_params(args, style: StyleConfig) -> Phase1Params:
    return Phase1Params(
        snap_tol=args.snap_tol,
        delta=args.delta,
        max_section_length=style.px(args.max_section_length),
        alpha_max=args.alpha_max,
        lmax_factor=args.lmax_factor,
        threads=args.threads,
        metrics=_metrics(args),
    )


def _is_graph(path: Path) -> bool:
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError):
        return False
    return isinstance(data, dict) and "vertices" in data and "edges" in data


def _load_graph(args) -> tuple[RoadGraph, dict | None]:
    if _is_graph(args.input):
        return RoadGraph.load(args.input), None
    style = _style(args)
    g, rep = run_phase1(ingest(args.input, style), _phase1_params(args, style))
    return g, rep.to_dict()


def cmd_generate(args) -> int:
    from .synth import make_network, network_segments, network_to_geojson

    net = make_network(args.kind, args.size, args.seed, args.block)
    if args.format == "geojson":
        text = json.dumps(network_to_geojson(net), indent=1, sort_keys=True) + "\n"
    else:
        text = segments_to_json(network_segments(net, _style(args)))
    args.out.write_text(text)
    log.info("wrote %s", args.out)
    return 0


def cmd_preprocess(args) -> int:
    g, rep = _load_graph(args)
    g.save(args.out)
    if rep:
        log.info("phase 1: %s", json.dumps(rep, sort_keys=True))
    return 0


def cmd_label(args) -> int:
    g, _ = _load_graph(args)
    budget = Budget(args.bnb_node_limit, args.time_limit_s, args.threads)
    lab = solve(g, args.algorithm, budget)
    lab.save(args.out, g)
    log.info(
        "%s: %d labels, %d sections labeled in %.3fs",
        args.algorithm, len(lab.labels), lab.meta["objective"], lab.meta["runtime_s"],
    )
    if lab.meta.get("proven_optimal") is False:
        log.warning("budget exhausted; the labeling is not proven optimal")
    return 0


def cmd_evaluate(args) -> int:
    from .evaluate import RunReport, evaluate

    algos = args.algorithm or ["baseline", "tree", "dnc-tree", "milp"]
    budget = Budget(args.bnb_node_limit, args.time_limit_s, args.threads)
    style = _style(args)
    report = RunReport()
    for path in args.inputs:
        one = evaluate(
            path, algos, instance=path.stem, zoom=args.zoom, budget=budget,
            phase1=_phase1_params(args, style), style=style,
        )
        report.extend(one)
        if one.phase1:
            report.phase1 = {**(report.phase1 or {}), path.stem: one.phase1}
    report.save(args.out, timing=not args.no_timing)
    bad = report.chain_violations()
    for line in bad:
        log.error("chain inequality violated: %s", line)
    return 1 if bad else 0


def cmd_render(args) -> int:
    from .render import render_svg

    g = RoadGraph.load(args.graph)
    lab = Labeling.load(args.labeling) if args.labeling else Labeling()
    render_svg(g, lab, args.out)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "preprocess": cmd_preprocess,
    "label": cmd_label,
    "evaluate": cmd_evaluate,
    "render": cmd_render,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
