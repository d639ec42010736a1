"""Deterministic synthetic road networks.

A :class:`Network` is a set of nodes plus roads given as node chains. It can
be emitted as annotated input segments for the full pipeline, or turned
directly into an abstract road graph with star-shaped junctions, which is
what the large benchmark and oracle suites use.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .fonts import DEFAULT_METRICS, FontMetrics
from .geometry import Point
from .roadgraph import GraphBuilder, RoadGraph, validate
from .style import StyleConfig

WORDS = (
    "Oak", "Elm", "Ash", "Birch", "Maple", "Cedar", "Willow", "Hawthorn", "Juniper", "Chestnut",
    "Mill", "Bridge", "Church", "Station", "Market", "Harbour", "Castle", "Orchard", "Meadow", "Quarry",
    "North", "South", "East", "West", "King", "Queen", "Prince", "Abbey", "Garden", "Spring",
    "Lake", "River", "Hill", "Valley", "Forest", "Park", "Canal", "Wharf", "Tower", "Union",
)
SUFFIXES = ("St", "Rd", "Ave", "Lane", "Way", "Street", "Road", "Avenue", "Boulevard", "Terrace")
CATEGORIES = ("primary", "secondary", "tertiary", "residential")


@dataclass
class RoadSpec:
    name: str
    category: str
    nodes: list[int]


@dataclass
class Network:
    nodes: list[Point] = field(default_factory=list)
    roads: list[RoadSpec] = field(default_factory=list)
    # optional intermediate shape points per (road index, chain position)
    shape: dict[tuple[int, int], list[Point]] = field(default_factory=dict)

    def road_polyline(self, r: int, i: int) -> list[Point]:
        road = self.roads[r]
        a, b = self.nodes[road.nodes[i]], self.nodes[road.nodes[i + 1]]
        return [a, *self.shape.get((r, i), []), b]


def make_name(rng: random.Random, used: set[str]) -> str:
    for _ in range(1000):
        words = rng.randint(1, 2)
        name = " ".join(rng.choice(WORDS) for _ in range(words)) + " " + rng.choice(SUFFIXES)
        if name not in used:
            used.add(name)
            return name
    raise RuntimeError("name pool exhausted")


def grid_network(n: int, seed: int, block: float = 100.0, jitter: float = 0.0, rows: int | None = None) -> Network:
    """Manhattan lattice with ``n`` blocks per row and column (``rows`` rows if given)."""
    if n < 1:
        raise ValueError("size must be at least 1")
    rng = random.Random(seed)
    m = n if rows is None else rows
    net = Network()
    idx = {}
    for i in range(m + 1):
        for j in range(n + 1):
            dx = rng.uniform(-jitter, jitter) * block
            dy = rng.uniform(-jitter, jitter) * block
            idx[(i, j)] = len(net.nodes)
            net.nodes.append((j * block + dx, i * block + dy))
    used: set[str] = set()
    for i in range(m + 1):
        cat = rng.choice(CATEGORIES)
        net.roads.append(RoadSpec(make_name(rng, used), cat, [idx[(i, j)] for j in range(n + 1)]))
    for j in range(n + 1):
        cat = rng.choice(CATEGORIES)
        net.roads.append(RoadSpec(make_name(rng, used), cat, [idx[(i, j)] for i in range(m + 1)]))
    return net


def organic_network(
    size: int,
    seed: int,
    radius: float = 120.0,
    spokes: int | None = None,
    overshoot: float = 0.0,
    ring_gap: float = 1.0,
) -> Network:
    """Jittered rings crossed by radial spokes; ring roads are closed loops.

    With ``overshoot > 0`` every spoke continues past the outer ring by that
    fraction of ``radius`` and ends in a dead end.
    """
    if size < 1:
        raise ValueError("size must be at least 1")
    rng = random.Random(seed)
    m = spokes if spokes is not None else 4 + 2 * size
    net = Network()
    idx = {}
    phase = rng.uniform(0, 2 * math.pi)
    for k in range(1, size + 1):
        for j in range(m):
            ang = phase + 2 * math.pi * (j + rng.uniform(-0.04, 0.04)) / m
            rad = radius * (1 + ring_gap * (k - 1) + rng.uniform(-0.15, 0.15))
            idx[(k, j)] = len(net.nodes)
            net.nodes.append((rad * math.cos(ang), rad * math.sin(ang)))
    used: set[str] = set()
    for k in range(1, size + 1):
        chain = [idx[(k, j)] for j in range(m)] + [idx[(k, 0)]]
        net.roads.append(RoadSpec(make_name(rng, used), rng.choice(CATEGORIES), chain))
        r = len(net.roads) - 1
        for i in range(m):
            a, b = net.nodes[chain[i]], net.nodes[chain[i + 1]]
            net.shape[(r, i)] = _bulge(a, b, rng, 0.08)
    for j in range(m):
        if overshoot > 0:
            x, y = net.nodes[idx[(size, j)]]
            f = 1.0 + overshoot * radius / math.hypot(x, y)
            idx[(size + 1, j)] = len(net.nodes)
            net.nodes.append((x * f, y * f))
    for j in range(m):
        top = size + 1 if overshoot > 0 else size
        if top == 1:
            break
        chain = [idx[(k, j)] for k in range(1, top + 1)]
        net.roads.append(RoadSpec(make_name(rng, used), rng.choice(CATEGORIES), chain))
        r = len(net.roads) - 1
        for i in range(len(chain) - 1):
            a, b = net.nodes[chain[i]], net.nodes[chain[i + 1]]
            net.shape[(r, i)] = _bulge(a, b, rng, 0.05)
    return net


def _bulge(a: Point, b: Point, rng: random.Random, amount: float) -> list[Point]:
    """Two interior shape points offset sideways, giving a gently curved segment."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    nx, ny = -dy, dx
    out = []
    off = rng.uniform(-amount, amount)
    for t in (1 / 3, 2 / 3):
        k = off * math.sin(math.pi * t)
        out.append((a[0] + t * dx + k * nx, a[1] + t * dy + k * ny))
    return out


def tree_network(n_edges: int, seed: int, step: float = 60.0) -> Network:
    """Random tree of road chains; roads mostly continue straight through nodes."""
    rng = random.Random(seed)
    net = Network(nodes=[(0.0, 0.0)])
    used: set[str] = set()
    heading = {0: rng.uniform(0, 2 * math.pi)}
    open_ends: list[tuple[int, int]] = []  # (road index, node)
    net.roads.append(RoadSpec(make_name(rng, used), rng.choice(CATEGORIES), [0]))
    open_ends.append((0, 0))
    edges = 0
    attempts = 0
    while edges < n_edges and attempts < 50 * n_edges:
        attempts += 1
        if open_ends and rng.random() < 0.5:
            r, node = rng.choice(open_ends)
            road = net.roads[r]
            if road.nodes[-1] != node:
                continue
            turn = rng.choice([0.0, 0.0, rng.uniform(-15, 15), rng.uniform(-60, 60)])
            ang = heading[node] + math.radians(turn)
        else:
            # branch a new road off an existing node
            node = rng.randrange(len(net.nodes))
            ang = heading[node] + rng.choice([-1, 1]) * math.radians(rng.uniform(60, 120))
            net.roads.append(RoadSpec(make_name(rng, used), rng.choice(CATEGORIES), [node]))
            r = len(net.roads) - 1
        length = step * rng.uniform(0.3, 2.0)
        x, y = net.nodes[node]
        p = (x + length * math.cos(ang), y + length * math.sin(ang))
        if _too_close(net, p, node, step * 0.25):
            continue
        net.nodes.append(p)
        new = len(net.nodes) - 1
        heading[new] = ang
        net.roads[r].nodes.append(new)
        open_ends = [(rr, nn) for rr, nn in open_ends if rr != r] + [(r, new)]
        edges += 1
    net.roads = [r for r in net.roads if len(r.nodes) >= 2]
    return net


def _too_close(net: Network, p: Point, parent: int, min_dist: float) -> bool:
    a = net.nodes[parent]
    for q in net.nodes:
        if math.dist(p, q) < min_dist:
            return True
    # reject candidate segments crossing existing road segments
    for road in net.roads:
        for s, t in zip(road.nodes, road.nodes[1:]):
            if parent in (s, t):
                continue
            if _segments_cross(a, p, net.nodes[s], net.nodes[t]):
                return True
    return False


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


# ---------------------------------------------------------------- direct graphs


def network_to_graph(
    net: Network,
    style: StyleConfig | None = None,
    metrics: FontMetrics = DEFAULT_METRICS,
    junction_radius: float | None = None,
    blocked_prob: float = 0.0,
    seed: int = 0,
    junction_blocked_prob: float = 0.0,
    alpha_max: float = 22.5,
    lmax_factor: float = 2.0,
) -> RoadGraph:
    """Abstract road graph with a star of junction edges at every meeting node.

    A node where exactly one road passes straight on is kept inside that
    road's section. Any other node of degree >= 2 becomes a junction whose
    arms reach ``junction_radius`` along each incident road (capped at a
    quarter of the arm).
    """
    style = style or StyleConfig()
    rng = random.Random(seed)
    # arm key (road, segment, end): end 0 is the segment start node, 1 its end node
    arms: dict[int, list[tuple[int, int, int]]] = {}
    for r, road in enumerate(net.roads):
        for s in range(len(road.nodes) - 1):
            arms.setdefault(road.nodes[s], []).append((r, s, 0))
            arms.setdefault(road.nodes[s + 1], []).append((r, s, 1))
    junction_nodes = {
        node for node, a in arms.items() if len(a) >= 3 or len({r for r, _, _ in a}) >= 2
    }
    for road in net.roads:
        # an isolated ring still needs one junction to avoid a self-loop section
        if road.nodes[0] == road.nodes[-1] and not junction_nodes.intersection(road.nodes):
            junction_nodes.add(road.nodes[0])
    rad = junction_radius if junction_radius is not None else max(style.stroke(c) for c in CATEGORIES) * 0.75

    b = GraphBuilder(alpha_max=alpha_max, lmax_factor=lmax_factor)
    road_ids = []
    for road in net.roads:
        font = style.font(road.category)
        road_ids.append(
            b.road(
                road.name,
                metrics.text_length(road.name, font),
                stroke=max(style.stroke(road.category), font),
                color=style.color(road.category),
                font=font,
                rank=style.rank(road.category),
                w_width=metrics.w_width(font),
            )
        )
    arm_point: dict[tuple[int, int, int], Point] = {}
    for node in sorted(junction_nodes):
        for key in sorted(arms[node]):
            r, s, end = key
            pts = net.road_polyline(r, s)
            seq = pts if end == 0 else pts[::-1]
            length = sum(math.dist(p, q) for p, q in zip(pts, pts[1:]))
            head, cut = _cut(seq, min(rad, 0.25 * length))
            arm_point[key] = cut
            blocked = []
            if junction_blocked_prob and rng.random() < junction_blocked_prob:
                arm = sum(math.dist(p, q) for p, q in zip(head, head[1:]))
                blocked = [(0.25 * arm, 0.75 * arm)]
            b.junction(head, road_ids[r], blocked=blocked)
    for r, road in enumerate(net.roads):
        nseg = len(road.nodes) - 1
        order = list(range(nseg))
        if road.nodes[0] == road.nodes[-1]:
            starts = [s for s in order if road.nodes[s] in junction_nodes]
            order = order[starts[0]:] + order[: starts[0]]
        run: list[int] = []
        for k, s in enumerate(order):
            run.append(s)
            if road.nodes[s + 1] not in junction_nodes and k < len(order) - 1:
                continue
            pts: list[Point] = []
            for t in run:
                seg = net.road_polyline(r, t)
                pts.extend(seg if not pts else seg[1:])
            if road.nodes[run[0]] in junction_nodes:
                pts[0] = arm_point[(r, run[0], 0)]
            if road.nodes[run[-1] + 1] in junction_nodes:
                pts[-1] = arm_point[(r, run[-1], 1)]
            blocked = []
            if blocked_prob and rng.random() < blocked_prob:
                total = sum(math.dist(p, q) for p, q in zip(pts, pts[1:]))
                a = rng.uniform(0, total * 0.8)
                blocked = [(a, min(total, a + rng.uniform(0.05, 0.3) * total))]
            b.section(pts, road_ids[r], blocked=blocked)
            run = []
    return b.build()


def _cut(pts: list[Point], d: float) -> tuple[list[Point], Point]:
    """Prefix of ``pts`` of length ``d`` and the cut point."""
    out = [pts[0]]
    left = d
    for p, q in zip(pts, pts[1:]):
        seg = math.dist(p, q)
        if seg >= left:
            t = left / seg
            c = (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))
            out.append(c)
            return out, c
        out.append(q)
        left -= seg
    return out, pts[-1]


def oracle_instance(kind: str, seed: int, stretch: float = 1.0) -> RoadGraph:
    """Small random graph sized for exhaustive checking (at most 12 countable sections).

    ``kind`` is "grid", "organic" or "tree". Scales are chosen so that name
    lengths are comparable to block lengths and labels often span junctions;
    ``stretch`` multiplies all distances.
    """
    if kind not in ("grid", "organic", "tree"):
        raise ValueError(f"unknown instance kind {kind!r}")
    for attempt in range(100):
        sub = seed * 1000 + attempt
        rng = random.Random(sub)
        if kind == "grid":
            net = grid_network(rng.randint(1, 2), sub, block=stretch * rng.uniform(40, 110), jitter=0.12, rows=rng.randint(1, 2))
        elif kind == "organic":
            net = organic_network(
                rng.randint(1, 2), sub, radius=stretch * rng.uniform(40, 90), spokes=3,
                overshoot=rng.uniform(0.4, 1.0), ring_gap=1.6,
            )
        else:
            net = tree_network(rng.randint(3, 9), sub, step=stretch * rng.uniform(25, 70))
        g = network_to_graph(net, StyleConfig(zoom=17), blocked_prob=0.25, seed=sub, junction_blocked_prob=0.1)
        if not validate(g):
            return g
    raise RuntimeError(f"no valid {kind} instance for seed {seed}")


# ---------------------------------------------------------------- pipeline input


def network_segments(net: Network, style: StyleConfig | None = None):
    """Annotated input segments of ``net``; categories hidden at the style's zoom are left out."""
    from .preprocess import AnnotatedSegment

    style = style or StyleConfig()
    out = []
    for r, road in enumerate(net.roads):
        if not style.included(road.category):
            continue
        for i in range(len(road.nodes) - 1):
            pts = net.road_polyline(r, i)
            for a, b in zip(pts, pts[1:]):
                out.append(
                    AnnotatedSegment(
                        a, b, road.name,
                        style.stroke(road.category),
                        style.color(road.category),
                        style.font(road.category),
                        style.rank(road.category),
                    )
                )
    return out


def make_network(kind: str, size: int, seed: int, block: float = 100.0) -> Network:
    """Grid (``size`` blocks per side) or organic (``size`` rings) network."""
    if kind == "grid":
        return grid_network(size, seed, block=block)
    if kind == "organic":
        return organic_network(size, seed, radius=block, overshoot=0.5, ring_gap=1.6)
    raise ValueError(f"unknown instance kind {kind!r}; expected grid or organic")


def generate_instance(kind: str, size: int, seed: int, style: StyleConfig | None = None, block: float = 100.0):
    """Deterministic annotated segments for a synthetic instance."""
    return network_segments(make_network(kind, size, seed, block), style)


def network_to_geojson(net: Network) -> dict:
    """One LineString feature per road with ``name`` and ``highway`` properties."""
    features = []
    for r, road in enumerate(net.roads):
        pts: list[Point] = []
        for i in range(len(road.nodes) - 1):
            seg = net.road_polyline(r, i)
            pts.extend(seg if not pts else seg[1:])
        features.append(
            {
                "type": "Feature",
                "properties": {"name": road.name, "highway": road.category},
                "geometry": {"type": "LineString", "coordinates": [[round(x, 6), round(y, 6)] for x, y in pts]},
            }
        )
    return {"type": "FeatureCollection", "features": features}


def quality_instance(seed: int) -> RoadGraph:
    """Organic graph with 140 to 252 sections; the zoom alternates between 16 and 17."""
    size = 5 + seed % 3
    net = organic_network(size, seed, radius=100, overshoot=0.5)
    return network_to_graph(
        net, StyleConfig(zoom=16 + seed % 2), blocked_prob=0.2, seed=seed, junction_blocked_prob=0.05
    )


def benchmark_grid(n: int = 158, seed: int = 1) -> RoadGraph:
    """Large jittered grid; the default size has about 50k sections."""
    net = grid_network(n, seed, block=100, jitter=0.1)
    return network_to_graph(net, StyleConfig(zoom=17), blocked_prob=0.1, seed=seed)
