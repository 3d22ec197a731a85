"""Building finite truncations of spaces whose cluster at infinity is a given graph.

Given a certified graph, a family of metrics is produced: one pair per
non-edge, the two members of a pair disagreeing exactly at that non-edge.
Levels n = 1..depth place an isometric copy of (V, r_n * d_i) into sup-norm
coordinate space via distance-difference coordinates, cycling i through the
family. The scaling sequence grows so fast (ratio of consecutive terms
increasing without bound) that different levels separate after rescaling,
which is what makes the cluster recoverable from the finite truncation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .graph_core import GraphError, WeightedRootedGraph, format_rational, parse_rational
from .metrization import DistanceMatrix, extend_metric, shortest_path_metric, admissible_interval
from .fpc import certify_fpc

MAX_FLOAT_EXPONENT = 1023  # binary64 overflow guard for scaling values


@dataclass(frozen=True)
class ScalingRule:
    """Named scaling sequence with an increasing consecutive-term ratio.

    ``factorial``: r_n = n!            (ratio n+1)
    ``power_square``: r_n = base**(n*n) (ratio base**(2n+1); faster separation
    at shallow depth)
    """

    name: str = "factorial"
    base: int = 2

    def value(self, n: int) -> int:
        if n < 1:
            raise GraphError("levels are numbered from 1")
        if self.name == "factorial":
            return math.factorial(n)
        if self.name == "power_square":
            return self.base ** (n * n)
        raise GraphError(f"unknown scaling rule {self.name!r}")

    def to_json_dict(self) -> dict:
        out = {"name": self.name}
        if self.name == "power_square":
            out["base"] = self.base
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "ScalingRule":
        return cls(data.get("name", "factorial"), data.get("base", 2))


@dataclass
class RealizationPlan:
    """Recipe for a point cloud realizing a certified graph.

    ``family`` holds 2*m metrics for m non-edges (a single shortest-path
    metric when the graph is complete); member i and member i+m agree with
    the edge weights everywhere but give different values to non-edge i.
    """

    graph: WeightedRootedGraph
    family: list[DistanceMatrix]
    non_edges: list[tuple[str, str]]
    chosen_values: list[tuple[Fraction, Fraction]]
    rule: ScalingRule
    dimension: int
    coordinate_order: tuple[str, ...]
    depth: int
    warnings: list[str] = field(default_factory=list)

    @property
    def period(self) -> int:
        return len(self.family)


@dataclass
class CloudPoint:
    label: Optional[str]
    coords: tuple[float, ...]
    exact: Optional[tuple[Fraction, ...]] = None


@dataclass
class CloudLevel:
    n: int
    r: float
    r_exact: Optional[Fraction]
    points: list[CloudPoint]


@dataclass
class LeveledPointCloud:
    """Finite truncation of an unbounded space, one labeled point set per level.

    Points live in sup-norm coordinate space; the basepoint is the origin and
    appears at every level (as the root's image in generated clouds). Exact
    rational shadows accompany the binary64 data wherever they exist.
    """

    dimension: int
    levels: list[CloudLevel]
    period: Optional[int] = None
    norm: str = "sup"

    @property
    def depth(self) -> int:
        return len(self.levels)

    def labels(self) -> tuple[str, ...]:
        seen = set()
        for level in self.levels:
            for p in level.points:
                seen.add(p.label)
        return tuple(sorted(seen, key=lambda x: (x is None, x or "")))

    def points_by_label(self, level: CloudLevel) -> dict[str, CloudPoint]:
        out = {}
        for p in level.points:
            if p.label in out:
                raise GraphError(f"duplicate label {p.label!r} at level {level.n}")
            out[p.label] = p
        return out

    def has_exact(self) -> bool:
        return all(
            lvl.r_exact is not None and all(p.exact is not None for p in lvl.points)
            for lvl in self.levels
        )

    def to_json_dict(self, include_exact: bool = True) -> dict:
        levels = []
        for lvl in self.levels:
            points = []
            for p in lvl.points:
                item: dict = {"label": p.label, "coords": list(p.coords)}
                if include_exact and p.exact is not None:
                    item["exact"] = [format_rational(x) for x in p.exact]
                points.append(item)
            entry: dict = {"n": lvl.n, "r": repr(lvl.r), "points": points}
            if include_exact and lvl.r_exact is not None:
                entry["r_exact"] = format_rational(lvl.r_exact)
            levels.append(entry)
        return {
            "norm": self.norm,
            "dimension": self.dimension,
            "basepoint": [0.0] * self.dimension,
            "period": self.period,
            "levels": levels,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "LeveledPointCloud":
        try:
            dimension = int(data["dimension"])
            raw_levels = data["levels"]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"cloud JSON is missing field: {exc}") from exc
        levels = []
        for entry in raw_levels:
            points = []
            for item in entry["points"]:
                exact = item.get("exact")
                points.append(
                    CloudPoint(
                        label=item.get("label"),
                        coords=tuple(float(c) for c in item["coords"]),
                        exact=tuple(parse_rational(x) for x in exact) if exact else None,
                    )
                )
            r_exact = entry.get("r_exact")
            levels.append(
                CloudLevel(
                    n=int(entry["n"]),
                    r=float(entry["r"]),
                    r_exact=parse_rational(r_exact) if r_exact is not None else None,
                    points=points,
                )
            )
        return cls(
            dimension=dimension,
            levels=levels,
            period=data.get("period"),
            norm=data.get("norm", "sup"),
        )

    def to_json(self, include_exact: bool = True) -> str:
        return json.dumps(self.to_json_dict(include_exact), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "LeveledPointCloud":
        return cls.from_json_dict(json.loads(text))


def sup_distance(a: Sequence, b: Sequence):
    """Sup-norm distance; works for float tuples and Fraction tuples alike."""
    return max(abs(x - y) for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# plan construction
# ---------------------------------------------------------------------------


def build_plan(
    g: WeightedRootedGraph,
    depth: int,
    rule: ScalingRule | None = None,
    max_vertices: Optional[int] = None,
) -> RealizationPlan:
    """Choose the metric family and scaling for a certified graph.

    For each non-edge with admissible interval [lo, hi] the pair of metrics
    fixes the non-edge distance at t1 = (lo+hi)/2 (or hi/2 when lo = 0) and
    at t2 = hi. Certification guarantees lo < hi, so the pair genuinely
    disagrees; the midpoint/endpoint choice maximizes that gap, which eases
    recovery at finite depth.
    """
    if depth < 1:
        raise GraphError("depth must be at least 1")
    cert = certify_fpc(g, max_vertices)
    if not cert.ok:
        raise GraphError(
            f"graph does not certify (failed: {cert.failure}); realization needs a certified graph"
        )
    rule = rule or ScalingRule()
    non_edges = list(g.non_edges())
    warnings: list[str] = []

    if not non_edges:
        family = [shortest_path_metric(g)]
        chosen: list[tuple[Fraction, Fraction]] = []
    else:
        lower_members: list[DistanceMatrix] = []
        upper_members: list[DistanceMatrix] = []
        chosen = []
        for u, v in non_edges:
            interval = admissible_interval(g, u, v, max_vertices)
            assert interval.lo < interval.hi, "certified graphs have no forced distances"
            t1 = interval.midpoint() if interval.lo > 0 else interval.hi / 2
            t2 = interval.hi
            lower_members.append(extend_metric(g, u, v, t1, max_vertices))
            upper_members.append(extend_metric(g, u, v, t2, max_vertices))
            chosen.append((t1, t2))
        family = lower_members + upper_members
        if depth < len(family):
            warnings.append(
                f"depth {depth} is shorter than one full metric-family period "
                f"({len(family)}): recovery cannot see every member"
            )

    return RealizationPlan(
        graph=g,
        family=family,
        non_edges=non_edges,
        chosen_values=chosen,
        rule=rule,
        dimension=len(g),
        coordinate_order=g.vertices,
        depth=depth,
        warnings=warnings,
    )


def generate_cloud(plan: RealizationPlan) -> LeveledPointCloud:
    """Materialize the plan: distance-difference coordinates per level.

    Point v at level n has j-th coordinate r_n * (d_i(v, v_j) - d_i(v_j, root))
    with i cycling through the family; the root lands on the origin at every
    level, and within a level the sup-norm distances reproduce r_n * d_i
    exactly at the rational level.
    """
    g = plan.graph
    order = plan.coordinate_order
    root = g.root
    max_entry = max(
        (x for d in plan.family for row in d.rows for x in row), default=Fraction(0)
    )
    levels = []
    for n in range(1, plan.depth + 1):
        r_exact = Fraction(plan.rule.value(n))
        # overflow guard for the binary64 side of the cloud
        largest = r_exact * max(max_entry, 1)
        if largest.numerator.bit_length() - largest.denominator.bit_length() > MAX_FLOAT_EXPONENT:
            raise GraphError(
                f"scaling value at level {n} overflows binary64; reduce depth"
            )
        d = plan.family[(n - 1) % len(plan.family)]
        points = []
        for v in order:
            exact = tuple(
                r_exact * (d.get(v, vj) - d.get(vj, root)) for vj in order
            )
            points.append(
                CloudPoint(
                    label=v,
                    coords=tuple(float(x) for x in exact),
                    exact=exact,
                )
            )
        levels.append(
            CloudLevel(n=n, r=float(r_exact), r_exact=r_exact, points=points)
        )
    return LeveledPointCloud(
        dimension=len(order), levels=levels, period=len(plan.family)
    )


def realize(
    g: WeightedRootedGraph,
    depth: int,
    rule: ScalingRule | None = None,
    max_vertices: Optional[int] = None,
) -> LeveledPointCloud:
    """build_plan + generate_cloud in one call."""
    return generate_cloud(build_plan(g, depth, rule, max_vertices))


# ---------------------------------------------------------------------------
# the one-point space
# ---------------------------------------------------------------------------


def single_point_space(depth: int, base: int = 2) -> LeveledPointCloud:
    """One-dimensional space whose cluster at infinity is a single point.

    Points x_n = base**(n*n) on the half line with basepoint 0, rescaled by
    r_n = sqrt(x_n * x_{n+1}). Every point of the space sits either far below
    or far above the scale r_n, so all normalized distances collapse to zero
    and the recovered cluster is the one-vertex graph.
    """
    if base < 2:
        raise GraphError("base must be an integer >= 2")
    if depth < 2:
        raise GraphError("depth must be at least 2")
    if (depth + 1) ** 2 * math.log2(base) > MAX_FLOAT_EXPONENT:
        raise GraphError(f"depth {depth} overflows binary64 for base {base}")
    levels = []
    for n in range(1, depth + 1):
        x_n = base ** (n * n)
        x_next = base ** ((n + 1) * (n + 1))
        # factor the root so neither operand overflows binary64
        r = math.sqrt(x_n) * math.sqrt(x_next)
        points = [
            CloudPoint(label="p", coords=(0.0,), exact=(Fraction(0),)),
            CloudPoint(label="x", coords=(float(x_n),), exact=(Fraction(x_n),)),
        ]
        # r is irrational (odd power of the base under a square root): no exact shadow
        levels.append(CloudLevel(n=n, r=r, r_exact=None, points=points))
    return LeveledPointCloud(dimension=1, levels=levels, period=None)


# ---------------------------------------------------------------------------
# cloud diagnostics used by tests and the CLI
# ---------------------------------------------------------------------------


def cross_level_separation(cloud: LeveledPointCloud) -> dict[int, float]:
    """Smallest normalized distance between non-basepoint points g levels apart.

    For each gap g returns min over n of min_{x in level n, y in level n+g}
    d(x, y) / r_n, skipping points at the origin. Generated clouds show this
    diverging monotonically once the gap exceeds one level.
    """
    out: dict[int, float] = {}
    for i, lvl in enumerate(cloud.levels):
        xs = [p for p in lvl.points if any(c != 0 for c in p.coords)]
        if not xs:
            continue
        for j in range(i + 1, len(cloud.levels)):
            other = cloud.levels[j]
            ys = [p for p in other.points if any(c != 0 for c in p.coords)]
            if not ys:
                continue
            gap = j - i
            val = min(
                sup_distance(x.coords, y.coords) / lvl.r for x in xs for y in ys
            )
            out[gap] = min(out.get(gap, math.inf), val)
    return out
