"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--grid SIZE]

Kernel timings use random inputs of realistic size. The end-to-end row runs
the tree heuristic on a synthetic grid once per backend, each in a fresh
interpreter so the backend is chosen at import.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from roadlabel.kernels import _pykernels

try:
    from roadlabel.kernels import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None


def random_pieces(rng: random.Random, n: int, span: float = 100.0):
    out = []
    for _ in range(n):
        lo = rng.uniform(0, span)
        out.append((lo, lo + rng.uniform(0, span / 4), rng.randint(0, 5), ("side", rng.randint(0, 9))))
    return out


def random_graph(rng: random.Random, n: int, m: int):
    src = [rng.randrange(n) for _ in range(m)]
    dst = [rng.randrange(n) for _ in range(m)]
    w = [rng.uniform(0.0, 10.0) for _ in range(m)]
    return n, src, dst, w


def kernel_cases(rng: random.Random):
    p1, p2 = random_pieces(rng, 40), random_pieces(rng, 40)
    pieces = random_pieces(rng, 200)
    graph = random_graph(rng, 60, 240)
    return {
        "pair_sup": lambda k: k.pair_sup(p1, p2, 120.0),
        "prune_pieces": lambda k: k.prune_pieces(pieces),
        "bellman_ford": lambda k: k.bellman_ford(*graph),
    }


E2E = (
    "import time;from roadlabel.synth import grid_network, network_to_graph;"
    "from roadlabel.style import StyleConfig;from roadlabel.solvers import tree_heuristic;"
    "g=network_to_graph(grid_network({size},1,block=100,jitter=0.1),StyleConfig(zoom=17),blocked_prob=0.1,seed=1);"
    "t=time.perf_counter();tree_heuristic(g);print(time.perf_counter()-t)"
)


def end_to_end(size: int, pure: bool) -> float:
    env = dict(os.environ)
    if pure:
        env["ROADLABEL_PURE_PYTHON"] = "1"
    else:
        env.pop("ROADLABEL_PURE_PYTHON", None)
    out = subprocess.run(
        [sys.executable, "-c", E2E.format(size=size)], env=env, capture_output=True, text=True, check=True
    )
    return float(out.stdout.strip())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--grid", type=int, default=40, help="blocks per side for the end-to-end row")
    args = ap.parse_args(argv)
    rng = random.Random(7)
    print(f"{'kernel':<14}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, call in kernel_cases(rng).items():
        py = timeit.timeit(lambda: call(_pykernels), number=args.repeat) / args.repeat * 1e3
        if _ckernels is None:
            print(f"{name:<14}{py:>12.4f}{'n/a':>12}{'':>10}")
            continue
        assert call(_pykernels) == call(_ckernels), f"{name}: backends disagree"
        cy = timeit.timeit(lambda: call(_ckernels), number=args.repeat) / args.repeat * 1e3
        print(f"{name:<14}{py:>12.4f}{cy:>12.4f}{py / cy:>9.1f}x")
    py = end_to_end(args.grid, pure=True)
    cy = end_to_end(args.grid, pure=False) if _ckernels is not None else float("nan")
    print(f"{'tree (grid)':<14}{py * 1e3:>12.1f}{cy * 1e3:>12.1f}{py / cy:>9.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
