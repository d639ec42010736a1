"""Solver entry points and the ``solve`` dispatcher."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from functools import partial

from ..labelcore import Labeling, baseline, brute_force_optimum, count_labeled_sections, validate_labeling
from ..roadgraph import RoadGraph
from .exact import solve_exact, solve_exact_classes
from .formulation import Formulation, build_formulation
from .tree import spanning_tree, tree_heuristic, tree_label

log = logging.getLogger(__name__)

ALGORITHMS = ("baseline", "tree", "dnc-tree", "milp", "dnc-milp", "oracle")


class InvalidLabelingError(RuntimeError):
    """A solver produced a labeling that fails validation."""


@dataclass(frozen=True)
class Budget:
    node_limit: int | None = None
    time_limit: float | None = None
    threads: int = 1


def _milp(g: RoadGraph, budget: Budget) -> Labeling:
    return solve_exact(None, g, budget.node_limit, budget.time_limit)


def _merge_proven(parts_meta: list[dict]) -> bool:
    return all(m.get("proven_optimal", True) for m in parts_meta)


def solve(g: RoadGraph, algorithm: str, budget: Budget | None = None) -> Labeling:
    """Run ``algorithm`` on ``g``, validate the result and record the runtime."""
    from ..dnc import decompose, compose, label_components

    budget = budget or Budget()
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {', '.join(ALGORITHMS)}")
    start = time.perf_counter()
    if algorithm == "baseline":
        result = baseline(g)
    elif algorithm == "tree":
        result = tree_heuristic(g)
    elif algorithm == "milp":
        result = _milp(g, budget)
    elif algorithm == "oracle":
        result = brute_force_optimum(g)
    else:
        inner = tree_heuristic if algorithm == "dnc-tree" else partial(_milp, budget=budget)
        d = decompose(g)
        parts = label_components(d, inner, budget.threads)
        result = compose(d, parts)
        if algorithm == "dnc-milp":
            result.meta["proven_optimal"] = _merge_proven([p.meta for p in parts])
    result.meta["algorithm"] = algorithm
    result.meta["runtime_s"] = time.perf_counter() - start
    result.meta["objective"] = count_labeled_sections(g, result)
    problems = validate_labeling(g, result)
    if problems:
        raise InvalidLabelingError(f"{algorithm} produced an invalid labeling: {problems[:5]}")
    return result


__all__ = [
    "ALGORITHMS",
    "Budget",
    "Formulation",
    "InvalidLabelingError",
    "build_formulation",
    "solve",
    "solve_exact",
    "solve_exact_classes",
    "spanning_tree",
    "tree_heuristic",
    "tree_label",
]
