"""Turning weighted graphs into exact (pseudo)metrics.

Shortest-path pseudometric, the metrizability decision, admissible distance
intervals for non-adjacent pairs, the completion that adds forced distances
as edges, and the circle/line embeddings of weighted cycles. Every comparison
in this module is an exact rational comparison; there are no tolerances here,
because the interesting boundary cases are exact equalities.
"""

from __future__ import annotations

import enum
import heapq
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .graph_core import (
    Cycle,
    DisconnectedGraph,
    GraphError,
    WeightedRootedGraph,
    enumerate_simple_paths,
    format_rational,
    parse_rational,
)


class DistanceMatrix:
    """Exact symmetric matrix of pairwise distances on a finite vertex set.

    Validates the pseudometric axioms on construction (zero diagonal,
    symmetry, triangle inequality over every triple). ``is_metric`` reports
    whether the off-diagonal entries are additionally strictly positive.
    """

    def __init__(self, vertices, rows, validate: bool = True):
        self.vertices: tuple[str, ...] = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("distance matrix vertices must be distinct")
        self._index = {v: i for i, v in enumerate(self.vertices)}
        n = len(self.vertices)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise GraphError("distance matrix must be square")
        self.rows: list[list[Fraction]] = [[parse_rational(x) for x in r] for r in rows]
        if validate:
            self.validate()

    def validate(self) -> None:
        n = len(self.vertices)
        for i in range(n):
            if self.rows[i][i] != 0:
                raise GraphError(f"nonzero diagonal at {self.vertices[i]!r}")
            for j in range(i + 1, n):
                if self.rows[i][j] != self.rows[j][i]:
                    raise GraphError(
                        f"asymmetry at ({self.vertices[i]!r},{self.vertices[j]!r})"
                    )
                if self.rows[i][j] < 0:
                    raise GraphError(
                        f"negative distance at ({self.vertices[i]!r},{self.vertices[j]!r})"
                    )
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if self.rows[i][j] > self.rows[i][k] + self.rows[k][j]:
                        raise GraphError(
                            "triangle inequality fails for "
                            f"({self.vertices[i]!r},{self.vertices[j]!r},{self.vertices[k]!r})"
                        )

    @property
    def is_metric(self) -> bool:
        n = len(self.vertices)
        return all(self.rows[i][j] > 0 for i in range(n) for j in range(i + 1, n))

    def get(self, u: str, v: str) -> Fraction:
        return self.rows[self._index[u]][self._index[v]]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DistanceMatrix)
            and self.vertices == other.vertices
            and self.rows == other.rows
        )

    def __repr__(self) -> str:
        return f"DistanceMatrix({len(self.vertices)} points)"

    def to_json_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "matrix": [[format_rational(x) for x in row] for row in self.rows],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DistanceMatrix":
        try:
            return cls(data["vertices"], data["matrix"])
        except (KeyError, TypeError) as exc:
            raise GraphError(f"distance matrix JSON is missing field: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DistanceMatrix":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class IntervalQ:
    """Closed rational interval of admissible distances for a vertex pair."""

    lo: Fraction
    hi: Fraction

    def contains(self, t: Fraction) -> bool:
        return self.lo <= t <= self.hi

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


class Metrizability(enum.Enum):
    METRIZABLE = "metrizable"
    PSEUDOMETRIZABLE_ONLY = "pseudometrizable_only"
    NOT_PSEUDOMETRIZABLE = "not_pseudometrizable"


@dataclass
class MetrizabilityVerdict:
    classification: Metrizability
    witness_cycle: Optional[Cycle] = None
    zero_weight_edge: Optional[tuple[str, str]] = None

    @property
    def metrizable(self) -> bool:
        return self.classification is Metrizability.METRIZABLE

    def to_json_dict(self) -> dict:
        out: dict = {"classification": self.classification.value}
        if self.witness_cycle is not None:
            out["witness_cycle"] = {
                "vertices": list(self.witness_cycle.vertices),
                "weights": [format_rational(w) for w in self.witness_cycle.weights],
            }
        if self.zero_weight_edge is not None:
            out["zero_weight_edge"] = list(self.zero_weight_edge)
        return out


# ---------------------------------------------------------------------------
# shortest-path pseudometric
# ---------------------------------------------------------------------------


def _dijkstra(g: WeightedRootedGraph, source: str) -> dict[str, Fraction]:
    dist: dict[str, Fraction] = {source: Fraction(0)}
    heap: list[tuple[Fraction, str]] = [(Fraction(0), source)]
    done: set[str] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v in g._adj[u]:
            nd = d + g.weight(u, v)
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def _dijkstra_path(g: WeightedRootedGraph, source: str, target: str):
    """Shortest source-target distance and one realizing simple path."""
    dist: dict[str, Fraction] = {source: Fraction(0)}
    prev: dict[str, str] = {}
    heap: list[tuple[Fraction, str]] = [(Fraction(0), source)]
    done: set[str] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == target:
            break
        for v in g._adj[u]:
            nd = d + g.weight(u, v)
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if target not in dist:
        return None, None
    path = [target]
    while path[-1] != source:
        path.append(prev[path[-1]])
    return dist[target], tuple(reversed(path))


def shortest_path_metric(g: WeightedRootedGraph) -> DistanceMatrix:
    """Exact all-pairs shortest-path pseudometric of a connected graph."""
    g.require_connected()
    n = len(g.vertices)
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i, u in enumerate(g.vertices):
        dist = _dijkstra(g, u)
        for j, v in enumerate(g.vertices):
            rows[i][j] = dist[v]
    # Dijkstra output satisfies the axioms by construction; skip the O(n^3) recheck.
    return DistanceMatrix(g.vertices, rows, validate=False)


# ---------------------------------------------------------------------------
# metrizability
# ---------------------------------------------------------------------------


def check_metrizable(g: WeightedRootedGraph) -> MetrizabilityVerdict:
    """Decide metrizability in polynomial time via the edge-detour test.

    An edge whose weight exceeds the shortest detour between its endpoints
    closes, together with that detour, a cycle violating the cycle inequality;
    conversely any violating cycle contains such an edge (its heaviest one).
    So one shortest-path run per deleted edge decides the cycle condition.
    """
    g.require_connected()
    for (u, v), w in sorted(g.weights.items()):
        reduced = g.without_edge(u, v)
        detour, path = _dijkstra_path(reduced, u, v)
        if detour is None:
            continue  # bridge: no cycle through this edge
        if w > detour:
            cycle = Cycle.from_graph(g, path)
            # path closes with edge {u,v}; re-check the violation exactly
            assert not cycle.satisfies_cycle_inequality()
            return MetrizabilityVerdict(
                Metrizability.NOT_PSEUDOMETRIZABLE, witness_cycle=cycle
            )
    for (u, v), w in sorted(g.weights.items()):
        if w == 0:
            return MetrizabilityVerdict(
                Metrizability.PSEUDOMETRIZABLE_ONLY, zero_weight_edge=(u, v)
            )
    return MetrizabilityVerdict(Metrizability.METRIZABLE)


def require_metrizable(g: WeightedRootedGraph) -> None:
    verdict = check_metrizable(g)
    if not verdict.metrizable:
        raise GraphError(f"graph is not metrizable ({verdict.classification.value})")


# ---------------------------------------------------------------------------
# admissible intervals and extensions
# ---------------------------------------------------------------------------


def admissible_interval(
    g: WeightedRootedGraph, mu: str, nu: str, max_vertices: Optional[int] = None
) -> IntervalQ:
    """Exact interval of values a metric extension may assign to a non-edge.

    Over every simple mu-nu path P: the lower end is the largest positive
    part of (2 * heaviest edge of P - length of P); the upper end is the
    smallest path length. Exhaustive path enumeration: a shortest-path
    shortcut would be unsound for the lower end.
    """
    require_metrizable(g)
    if g.has_edge(mu, nu):
        raise GraphError(f"{mu!r} and {nu!r} are adjacent; interval applies to non-edges")
    lo = Fraction(0)
    hi: Optional[Fraction] = None
    for path in enumerate_simple_paths(g, mu, nu, max_vertices):
        ws = [g.weight(path[i], path[i + 1]) for i in range(len(path) - 1)]
        total = sum(ws, Fraction(0))
        slack = 2 * max(ws) - total
        if slack > lo:
            lo = slack
        if hi is None or total < hi:
            hi = total
    if hi is None:
        raise DisconnectedGraph(f"no path joins {mu!r} and {nu!r}")
    assert lo <= hi, "admissible interval inverted on a metrizable graph"
    return IntervalQ(lo, hi)


def extend_metric(
    g: WeightedRootedGraph, mu: str, nu: str, t, max_vertices: Optional[int] = None
) -> DistanceMatrix:
    """A metric agreeing with the weights and assigning exactly t to (mu, nu).

    Realized as the shortest-path metric of the graph augmented with the edge
    {mu, nu} of weight t; admissible iff t > 0 and t lies in the pair's
    admissible interval.
    """
    t = parse_rational(t)
    interval = admissible_interval(g, mu, nu, max_vertices)
    if t <= 0:
        raise GraphError(f"extension value must be positive, got {t}")
    if not interval.contains(t):
        raise GraphError(
            f"value {t} for ({mu!r},{nu!r}) lies outside the admissible interval {interval}"
        )
    return shortest_path_metric(g.with_edge(mu, nu, t))


def unique_pairs(
    g: WeightedRootedGraph, max_vertices: Optional[int] = None
) -> tuple[tuple[str, str], ...]:
    """Non-adjacent pairs whose distance is the same in every metric extension.

    Exactly the pairs with a degenerate admissible interval.
    """
    require_metrizable(g)
    out = []
    for u, v in g.non_edges():
        if admissible_interval(g, u, v, max_vertices).degenerate:
            out.append((u, v))
    return tuple(out)


def forced_completion(
    g: WeightedRootedGraph, max_vertices: Optional[int] = None
) -> WeightedRootedGraph:
    """Single-pass completion: add each unique pair as an edge with its forced weight."""
    require_metrizable(g)
    out = g
    for u, v in g.non_edges():
        interval = admissible_interval(g, u, v, max_vertices)
        if interval.degenerate:
            out = out.with_edge(u, v, interval.lo)
    return out


def is_between(d: DistanceMatrix, x: str, y: str, z: str) -> bool:
    """True iff y lies metrically between x and z: d(x,z) == d(x,y) + d(y,z)."""
    if len({x, y, z}) != 3:
        raise GraphError("betweenness needs three pairwise distinct points")
    return d.get(x, z) == d.get(x, y) + d.get(y, z)


# ---------------------------------------------------------------------------
# cycle embeddings
# ---------------------------------------------------------------------------


def embed_cycle_on_circle(cycle: Cycle) -> tuple[dict[str, Fraction], DistanceMatrix]:
    """Place a metrizable weighted cycle on a circle of matching circumference.

    Positions are cumulative arc lengths along the cycle order; the returned
    matrix is the minor-arc metric, which agrees with the edge weights.
    """
    if any(w <= 0 for w in cycle.weights):
        raise GraphError("circle embedding needs strictly positive weights")
    total = cycle.total_weight()
    if not cycle.satisfies_cycle_inequality():
        raise GraphError(
            f"cycle is not metrizable: 2*{cycle.max_weight()} > {total}"
        )
    positions: dict[str, Fraction] = {}
    s = Fraction(0)
    for v, w in zip(cycle.vertices, cycle.weights):
        positions[v] = s
        s += w
    verts = sorted(cycle.vertices)
    rows = []
    for u in verts:
        row = []
        for v in verts:
            gap = abs(positions[u] - positions[v])
            row.append(min(gap, total - gap))
        rows.append(row)
    return positions, DistanceMatrix(verts, rows, validate=False)


def embed_tight_cycle_on_line(cycle: Cycle) -> dict[str, Fraction]:
    """Unfold a tight cycle onto the rational line.

    Only valid in the equality case (twice the heaviest edge equals the total
    length); then the heaviest edge is unique, the line distances realize all
    edge weights, and the embedding is isometric to the circle one. Starts at
    the lexicographically smaller endpoint of the heaviest edge, at 0.
    """
    if any(w <= 0 for w in cycle.weights):
        raise GraphError("line embedding needs strictly positive weights")
    if not cycle.satisfies_cycle_inequality():
        raise GraphError("cycle is not metrizable")
    if not cycle.is_tight():
        raise GraphError(
            "cycle is not tight (strict inequality): use the circle embedding instead"
        )
    n = len(cycle.vertices)
    k = cycle.weights.index(cycle.max_weight())
    a, b = cycle.vertices[k], cycle.vertices[(k + 1) % n]
    # Walk the non-heaviest arc from one endpoint of the heaviest edge.
    if a < b:
        arc = [cycle.vertices[(k + 1 + i) % n] for i in range(n)]  # b .. a
        arc.reverse()  # a first, reaching b along the light arc
        weights_along = [cycle.weights[(k + 1 + i) % n] for i in range(n - 1)]
        weights_along.reverse()
        start = a
    else:
        arc = [cycle.vertices[(k + 1 + i) % n] for i in range(n)]  # b, ..., a
        weights_along = [cycle.weights[(k + 1 + i) % n] for i in range(n - 1)]
        start = b
    coords: dict[str, Fraction] = {start: Fraction(0)}
    s = Fraction(0)
    for v, w in zip(arc[1:], weights_along):
        s += w
        coords[v] = s
    return coords


def line_distance_matrix(coords: dict[str, Fraction]) -> DistanceMatrix:
    verts = sorted(coords)
    rows = [[abs(coords[u] - coords[v]) for v in verts] for u in verts]
    return DistanceMatrix(verts, rows, validate=False)


def cycle_from_graph(g: WeightedRootedGraph) -> Cycle:
    """Interpret a graph that is exactly one cycle as a Cycle value.

    Orientation is canonical: start at the least vertex, walk toward its
    lesser neighbor.
    """
    g.require_connected()
    if len(g) < 3:
        raise GraphError("a cycle needs at least 3 vertices")
    for v in g.vertices:
        if len(g._adj[v]) != 2:
            raise GraphError(f"vertex {v!r} has degree {len(g._adj[v])}, expected 2")
    start = g.vertices[0]
    first = min(g._adj[start])
    order = [start, first]
    while True:
        nxt = [x for x in g._adj[order[-1]] if x != order[-2]][0]
        if nxt == start:
            break
        order.append(nxt)
    return Cycle.from_graph(g, order)


def metric_agrees_with_weights(d: DistanceMatrix, g: WeightedRootedGraph) -> bool:
    """True iff d reproduces every edge weight of g exactly."""
    return all(d.get(u, v) == w for (u, v), w in g.weights.items())
