"""Weighted rooted graphs and the combinatorial primitives built on them.

All weights are exact rationals (``fractions.Fraction``); no floating point
enters this module. Vertex identifiers are opaque strings ordered
lexicographically, and every "deterministic output" promise refers to that
order.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Optional, Sequence

DEFAULT_ENUMERATION_CAP = 14
DEFAULT_ISOMORPHISM_CAP = 12

ENV_MAX_VERTICES = "METRIC_CLUSTER_MAX_VERTICES"


class GraphError(ValueError):
    """Invalid graph input or violated operation precondition."""


class VertexCapExceeded(GraphError):
    """Graph is larger than the configured bound for an exponential search."""


class DisconnectedGraph(GraphError):
    """Operation requires a connected graph."""


def vertex_cap(default: int, override: Optional[int] = None) -> int:
    """Resolve an enumeration cap: explicit argument > env var > default."""
    if override is not None:
        return override
    env = os.environ.get(ENV_MAX_VERTICES)
    if env is not None:
        return int(env)
    return default


def parse_rational(text) -> Fraction:
    """Parse an exact rational from a ``p/q`` or decimal literal (or number)."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise GraphError(
            f"refusing float weight {text!r}: pass a string ('3/2' or '1.5') for exactness"
        )
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise GraphError(f"not a rational literal: {text!r}") from exc


def format_rational(value: Fraction) -> str:
    """Format a rational so that ``parse_rational`` round-trips bit-exactly."""
    return str(value)


def edge_key(u: str, v: str) -> tuple[str, str]:
    """Canonical (sorted) form of an undirected edge."""
    if u == v:
        raise GraphError(f"loop edge {{{u!r},{u!r}}} is not allowed")
    return (u, v) if u < v else (v, u)


class WeightedRootedGraph:
    """Finite simple loopless graph with rational edge weights and a root.

    Instances are immutable in practice: all operations on them are pure and
    return new graphs. Weights must be >= 0; strict positivity is validated
    separately where an operation needs it.
    """

    def __init__(
        self,
        vertices: Iterable[str],
        weights: Mapping[tuple[str, str], Fraction] | Iterable[tuple[tuple[str, str], Fraction]],
        root: str,
    ):
        self.vertices: tuple[str, ...] = tuple(sorted(set(vertices)))
        if not self.vertices:
            raise GraphError("graph needs at least one vertex")
        vertex_set = set(self.vertices)
        if root not in vertex_set:
            raise GraphError(f"root {root!r} is not a vertex")
        self.root = root

        items = weights.items() if isinstance(weights, Mapping) else weights
        self.weights: dict[tuple[str, str], Fraction] = {}
        for (u, v), w in items:
            key = edge_key(u, v)
            if key[0] not in vertex_set or key[1] not in vertex_set:
                raise GraphError(f"edge {key} uses unknown vertices")
            if key in self.weights:
                raise GraphError(f"duplicate edge {key}")
            w = parse_rational(w)
            if w < 0:
                raise GraphError(f"negative weight {w} on edge {key}")
            self.weights[key] = w

        self._adj: dict[str, set[str]] = {v: set() for v in self.vertices}
        for u, v in self.weights:
            self._adj[u].add(v)
            self._adj[v].add(u)

    # -- basic queries ----------------------------------------------------

    def neighbors(self, v: str) -> tuple[str, ...]:
        return tuple(sorted(self._adj[v]))

    def adjacency(self) -> dict[str, set[str]]:
        return {v: set(nb) for v, nb in self._adj.items()}

    def has_edge(self, u: str, v: str) -> bool:
        return edge_key(u, v) in self.weights

    def weight(self, u: str, v: str) -> Fraction:
        return self.weights[edge_key(u, v)]

    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted(self.weights))

    def non_edges(self) -> tuple[tuple[str, str], ...]:
        """Sorted non-adjacent vertex pairs."""
        return tuple(
            (u, v) for u, v in combinations(self.vertices, 2) if (u, v) not in self.weights
        )

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, WeightedRootedGraph)
            and self.vertices == other.vertices
            and self.root == other.root
            and self.weights == other.weights
        )

    def __repr__(self) -> str:
        return (
            f"WeightedRootedGraph({len(self.vertices)} vertices, "
            f"{len(self.weights)} edges, root={self.root!r})"
        )

    # -- connectivity ------------------------------------------------------

    def components(self) -> list[set[str]]:
        seen: set[str] = set()
        out = []
        for start in self.vertices:
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                for nb in self._adj[stack.pop()]:
                    if nb not in comp:
                        comp.add(nb)
                        stack.append(nb)
            seen |= comp
            out.append(comp)
        return out

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def require_connected(self) -> None:
        comps = self.components()
        if len(comps) > 1:
            a = min(comps[0])
            b = min(comps[1])
            raise DisconnectedGraph(
                f"graph is disconnected: {a!r} and {b!r} lie in different components"
            )

    # -- derived graphs ----------------------------------------------------

    def with_edge(self, u: str, v: str, w: Fraction) -> "WeightedRootedGraph":
        """Copy of the graph with one extra weighted edge."""
        if self.has_edge(u, v):
            raise GraphError(f"edge {edge_key(u, v)} already present")
        new = dict(self.weights)
        new[edge_key(u, v)] = parse_rational(w)
        return WeightedRootedGraph(self.vertices, new, self.root)

    def with_weight(self, u: str, v: str, w: Fraction) -> "WeightedRootedGraph":
        """Copy of the graph with one edge weight replaced."""
        key = edge_key(u, v)
        if key not in self.weights:
            raise GraphError(f"edge {key} not present")
        new = dict(self.weights)
        new[key] = parse_rational(w)
        return WeightedRootedGraph(self.vertices, new, self.root)

    def without_edge(self, u: str, v: str) -> "WeightedRootedGraph":
        key = edge_key(u, v)
        if key not in self.weights:
            raise GraphError(f"edge {key} not present")
        new = {e: w for e, w in self.weights.items() if e != key}
        return WeightedRootedGraph(self.vertices, new, self.root)

    def without_vertex(self, v: str) -> "WeightedRootedGraph":
        if v == self.root:
            raise GraphError("cannot delete the root; pick a new root first")
        rest = [x for x in self.vertices if x != v]
        new = {e: w for e, w in self.weights.items() if v not in e}
        return WeightedRootedGraph(rest, new, self.root)

    def relabel(self, mapping: Mapping[str, str]) -> "WeightedRootedGraph":
        """Rename vertices through a bijective mapping."""
        if set(mapping) != set(self.vertices) or len(set(mapping.values())) != len(self.vertices):
            raise GraphError("relabel mapping must be a bijection on the vertex set")
        new = {(mapping[u], mapping[v]): w for (u, v), w in self.weights.items()}
        return WeightedRootedGraph([mapping[v] for v in self.vertices], new, mapping[self.root])

    def scale_weights(self, factor: Fraction) -> "WeightedRootedGraph":
        factor = parse_rational(factor)
        if factor <= 0:
            raise GraphError("scale factor must be positive")
        new = {e: w * factor for e, w in self.weights.items()}
        return WeightedRootedGraph(self.vertices, new, self.root)

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "root": self.root,
            "edges": [
                {"u": u, "v": v, "w": format_rational(w)}
                for (u, v), w in sorted(self.weights.items())
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "WeightedRootedGraph":
        try:
            vertices = data["vertices"]
            root = data["root"]
            raw_edges = data["edges"]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"graph JSON is missing field: {exc}") from exc
        weights = []
        for item in raw_edges:
            # "w" may be omitted for shape-only inputs (weight synthesis).
            w = item.get("w", "1")
            weights.append(((item["u"], item["v"]), parse_rational(w)))
        return cls(vertices, weights, root)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "WeightedRootedGraph":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class Cycle:
    """Simple cycle: an ordered vertex tuple with the aligned edge weights.

    ``weights[i]`` is the weight of ``{vertices[i], vertices[i+1]}``, the last
    entry closing the cycle back to ``vertices[0]``.
    """

    vertices: tuple[str, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        n = len(self.vertices)
        if n < 3:
            raise GraphError("a cycle needs at least 3 vertices")
        if len(set(self.vertices)) != n:
            raise GraphError("cycle vertices must be pairwise distinct")
        if len(self.weights) != n:
            raise GraphError("cycle needs one weight per edge")

    @classmethod
    def from_graph(cls, g: WeightedRootedGraph, order: Sequence[str]) -> "Cycle":
        order = tuple(order)
        weights = []
        for i, u in enumerate(order):
            v = order[(i + 1) % len(order)]
            if not g.has_edge(u, v):
                raise GraphError(f"{u!r}-{v!r} is not an edge; not a cycle of the graph")
            weights.append(g.weight(u, v))
        return cls(order, tuple(weights))

    def edges(self) -> tuple[tuple[str, str], ...]:
        n = len(self.vertices)
        return tuple(
            edge_key(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)
        )

    def total_weight(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def max_weight(self) -> Fraction:
        return max(self.weights)

    def satisfies_cycle_inequality(self) -> bool:
        """Exact check of `twice the heaviest edge <= total length`."""
        return 2 * self.max_weight() <= self.total_weight()

    def is_tight(self) -> bool:
        """Exact equality case: twice the heaviest edge == total length."""
        return 2 * self.max_weight() == self.total_weight()

    def canonical_key(self) -> tuple[str, ...]:
        """Vertex tuple normalized up to rotation and reflection."""
        n = len(self.vertices)
        best = None
        for seq in (self.vertices, tuple(reversed(self.vertices))):
            for shift in range(n):
                rot = seq[shift:] + seq[:shift]
                if best is None or rot < best:
                    best = rot
        return best


@dataclass
class IsoMapping:
    """Vertex bijection witnessing a (weighted) rooted isomorphism."""

    mapping: dict[str, str]

    def apply(self, v: str) -> str:
        return self.mapping[v]

    def inverse(self) -> "IsoMapping":
        return IsoMapping({v: u for u, v in self.mapping.items()})

    def verify(
        self,
        g1: WeightedRootedGraph,
        g2: WeightedRootedGraph,
        weighted: bool = True,
        weight_tol_rel: Fraction | float = 0,
    ) -> bool:
        """Re-evaluate the isomorphism conditions from scratch."""
        m = self.mapping
        if set(m) != set(g1.vertices) or sorted(m.values()) != list(g2.vertices):
            return False
        if m[g1.root] != g2.root:
            return False
        for u, v in combinations(g1.vertices, 2):
            e1 = g1.has_edge(u, v)
            e2 = g2.has_edge(m[u], m[v])
            if e1 != e2:
                return False
            if weighted and e1:
                if not _weights_close(g1.weight(u, v), g2.weight(m[u], m[v]), weight_tol_rel):
                    return False
        return True


def _weights_close(a: Fraction, b: Fraction, tol_rel) -> bool:
    if tol_rel == 0:
        return a == b
    tol = Fraction(tol_rel) if not isinstance(tol_rel, Fraction) else tol_rel
    return abs(a - b) <= tol * max(abs(a), abs(b))


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def enumerate_cycles(
    g: WeightedRootedGraph, max_vertices: Optional[int] = None
) -> Iterator[Cycle]:
    """Yield every simple cycle exactly once, up to rotation and reflection.

    Exponential DFS; refuses graphs above the configured vertex cap.
    """
    cap = vertex_cap(DEFAULT_ENUMERATION_CAP, max_vertices)
    if len(g) > cap:
        raise VertexCapExceeded(
            f"cycle enumeration refused: {len(g)} vertices exceeds cap {cap}"
        )
    adj = {v: sorted(g._adj[v]) for v in g.vertices}

    for start in g.vertices:
        # Only cycles whose minimal vertex is `start`; dedupe the two
        # traversal directions by requiring path[1] < path[-1].
        path = [start]
        on_path = {start}

        def dfs():
            u = path[-1]
            for w in adj[u]:
                if w <= start or w in on_path:
                    if w == start and len(path) >= 3 and path[1] < path[-1]:
                        yield Cycle.from_graph(g, tuple(path))
                    continue
                path.append(w)
                on_path.add(w)
                yield from dfs()
                path.pop()
                on_path.remove(w)

        yield from dfs()


def enumerate_simple_paths(
    g: WeightedRootedGraph, u: str, v: str, max_vertices: Optional[int] = None
) -> Iterator[tuple[str, ...]]:
    """Yield every simple path from u to v exactly once."""
    if u == v:
        raise GraphError("path endpoints must be distinct")
    if u not in g._adj or v not in g._adj:
        raise GraphError("path endpoints must be vertices of the graph")
    cap = vertex_cap(DEFAULT_ENUMERATION_CAP, max_vertices)
    if len(g) > cap:
        raise VertexCapExceeded(
            f"path enumeration refused: {len(g)} vertices exceeds cap {cap}"
        )
    adj = {x: sorted(g._adj[x]) for x in g.vertices}
    path = [u]
    on_path = {u}

    def dfs():
        x = path[-1]
        if x == v:
            yield tuple(path)
            return
        for w in adj[x]:
            if w not in on_path:
                path.append(w)
                on_path.add(w)
                yield from dfs()
                path.pop()
                on_path.remove(w)

    yield from dfs()


def maximal_cliques(g: WeightedRootedGraph) -> list[frozenset[str]]:
    """All maximal cliques, lexicographically sorted (Bron-Kerbosch, pivoting)."""
    return maximal_cliques_of(set(g.vertices), g.adjacency())


def maximal_cliques_of(vertices: set[str], adj: dict[str, set[str]]) -> list[frozenset[str]]:
    """Bron-Kerbosch with pivoting over an explicit adjacency structure."""
    out: list[frozenset[str]] = []

    def expand(r: set[str], p: set[str], x: set[str]):
        if not p and not x:
            out.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda w: len(adj[w] & p))
        for v in sorted(p - adj[pivot]):
            expand(r | {v}, p & adj[v], x & adj[v])
            p.remove(v)
            x.add(v)

    if vertices:
        expand(set(), set(vertices), set())
    return sorted(out, key=lambda c: sorted(c))


def is_dominating(g: WeightedRootedGraph, v: str) -> bool:
    """True iff v is adjacent to every other vertex."""
    if v not in g._adj:
        raise GraphError(f"{v!r} is not a vertex")
    return len(g._adj[v]) == len(g) - 1


# ---------------------------------------------------------------------------
# isomorphism
# ---------------------------------------------------------------------------


def isomorphic(
    g1: WeightedRootedGraph,
    g2: WeightedRootedGraph,
    weighted: bool = True,
    weight_tol_rel: Fraction | float = 0,
    max_vertices: Optional[int] = None,
) -> Optional[IsoMapping]:
    """Search for a rooted (optionally weight-preserving) isomorphism.

    Returns the lexicographically least witness (images of the sorted g1
    vertices tried in sorted order), or None. In weighted mode, graphs whose
    distance-from-root labeling is injective skip the backtracking search:
    the labels force the only possible mapping, which is then verified.
    """
    if len(g1) != len(g2) or len(g1.weights) != len(g2.weights):
        return None

    if weighted:
        forced = _forced_mapping_by_root_labels(g1, g2, weight_tol_rel)
        if forced is not None:
            candidate, definitive = forced
            if candidate is not None:
                iso = IsoMapping(candidate)
                if iso.verify(g1, g2, weighted=True, weight_tol_rel=weight_tol_rel):
                    return iso
            if definitive:
                return None
            # tolerant pairing is only heuristic: fall through to the search

    cap = vertex_cap(DEFAULT_ISOMORPHISM_CAP, max_vertices)
    if len(g1) > cap:
        raise VertexCapExceeded(
            f"isomorphism search refused: {len(g1)} vertices exceeds cap {cap}"
        )
    return _backtracking_isomorphism(g1, g2, weighted, weight_tol_rel)


def _root_labels(g: WeightedRootedGraph) -> Optional[dict[str, Fraction]]:
    """Distance-from-root labeling; None unless the root is dominating."""
    if not is_dominating(g, g.root):
        return None
    labels = {g.root: Fraction(0)}
    for v in g.vertices:
        if v != g.root:
            labels[v] = g.weight(g.root, v)
    return labels


def _forced_mapping_by_root_labels(g1, g2, weight_tol_rel):
    """Fast path: injective root labelings force the only candidate mapping.

    Returns None when the fast path does not apply, else a pair
    (mapping-or-None, definitive). With exact weights the answer is
    definitive: any isomorphism must match labels exactly. Under a weight
    tolerance the sorted-order pairing is only the best candidate, so a
    failed candidate must not be taken as a proof of non-isomorphism.
    """
    lab1 = _root_labels(g1)
    lab2 = _root_labels(g2)
    if lab1 is None or lab2 is None:
        return None
    if len(set(lab1.values())) != len(lab1) or len(set(lab2.values())) != len(lab2):
        return None

    if weight_tol_rel != 0:
        order1 = sorted(lab1, key=lambda v: (lab1[v], v))
        order2 = sorted(lab2, key=lambda v: (lab2[v], v))
        for a, b in zip(order1, order2):
            if not _weights_close(lab1[a], lab2[b], weight_tol_rel):
                return (None, False)
        return (dict(zip(order1, order2)), False)

    by_value = {w: v for v, w in lab2.items()}
    mapping = {}
    for v, w in lab1.items():
        img = by_value.get(w)
        if img is None:
            return (None, True)
        mapping[v] = img
    return (mapping, True)


def _backtracking_isomorphism(g1, g2, weighted, weight_tol_rel):
    verts1 = list(g1.vertices)
    verts2 = list(g2.vertices)
    deg1 = {v: len(g1._adj[v]) for v in verts1}
    deg2 = {v: len(g2._adj[v]) for v in verts2}
    if sorted(deg1.values()) != sorted(deg2.values()):
        return None

    def weight_profile(g, v):
        return sorted(g.weight(v, nb) for nb in g._adj[v])

    if weighted and weight_tol_rel == 0:
        prof1 = {v: weight_profile(g1, v) for v in verts1}
        prof2 = {v: weight_profile(g2, v) for v in verts2}
    else:
        prof1 = prof2 = None

    mapping: dict[str, str] = {}
    used: set[str] = set()

    def feasible(u, w):
        if (u == g1.root) != (w == g2.root):
            return False
        if deg1[u] != deg2[w]:
            return False
        if prof1 is not None and prof1[u] != prof2[w]:
            return False
        for nb, img in mapping.items():
            adj_in_1 = nb in g1._adj[u]
            adj_in_2 = img in g2._adj[w]
            if adj_in_1 != adj_in_2:
                return False
            if weighted and adj_in_1:
                if not _weights_close(g1.weight(u, nb), g2.weight(w, img), weight_tol_rel):
                    return False
        return True

    def extend(i):
        if i == len(verts1):
            return True
        u = verts1[i]
        for w in verts2:
            if w in used or not feasible(u, w):
                continue
            mapping[u] = w
            used.add(w)
            if extend(i + 1):
                return True
            del mapping[u]
            used.remove(w)
        return False

    if extend(0):
        return IsoMapping(dict(mapping))
    return None


def is_weight_preserving_homomorphism(
    g1: WeightedRootedGraph,
    g2: WeightedRootedGraph,
    mapping: Mapping[str, str],
    weight_tol_rel: Fraction | float = 0,
) -> bool:
    """Check: root maps to root, edges map to edges, edge weights preserved."""
    if set(mapping) != set(g1.vertices):
        return False
    if any(img not in g2._adj for img in mapping.values()):
        return False
    if mapping[g1.root] != g2.root:
        return False
    for (u, v), w in g1.weights.items():
        fu, fv = mapping[u], mapping[v]
        if fu == fv or not g2.has_edge(fu, fv):
            return False
        if not _weights_close(w, g2.weight(fu, fv), weight_tol_rel):
            return False
    return True


def is_weight_preserving_monomorphism(
    g1: WeightedRootedGraph,
    g2: WeightedRootedGraph,
    mapping: Mapping[str, str],
    weight_tol_rel: Fraction | float = 0,
) -> bool:
    """Injective weight preserving homomorphism."""
    return len(set(mapping.values())) == len(g1.vertices) and is_weight_preserving_homomorphism(
        g1, g2, mapping, weight_tol_rel
    )
