"""Empirical reconstruction of the cluster at infinity from a leveled cloud.

Each label of the cloud is read as a sequence (one point per level). Over the
last ``window`` levels the normalized distances d(x_n, y_n)/r_n are examined:
a pair whose values stay within tolerance of zero is identified, a pair whose
values stabilize (small tail spread) becomes an edge weighted by the tail
mean, and a pair whose values keep oscillating stays non-adjacent. Sequences
whose normalized basepoint distance decays to zero are absorbed into the
basepoint class, which becomes the root of the recovered graph.

Convergence is judged by tail spread, never by fitting limits: at finite
depth the spread is the honest proxy for "the limit exists". The reported
tail minimum/maximum double as lower/upper limit estimates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .graph_core import GraphError, WeightedRootedGraph, is_dominating
from .metrization import Metrizability, check_metrizable
from .fpc import clique_bound_check
from .realization import CloudLevel, CloudPoint, LeveledPointCloud, sup_distance

DEFAULT_TOL_REL = 1e-6
DEFAULT_TOL_ABS = 1e-9

_BASE = object()  # sentinel trace for the basepoint (origin at every level)


@dataclass
class SequenceTrace:
    """Per-label normalized measurements over the analysis window.

    ``base_values`` holds d(x_n, p)/r_n per analyzed level; ``pair_values``
    holds d(x_n, y_n)/r_n against every other label.
    """

    label: str
    base_values: list
    pair_values: dict[str, list]
    merged_into_root: bool = False
    merge_reason: Optional[str] = None


@dataclass
class RecoveredCluster:
    """Recovered weighted rooted graph plus the evidence it was built from."""

    graph: WeightedRootedGraph
    rho0: dict[str, Fraction]
    classes: dict[str, tuple[str, ...]]
    traces: dict[str, SequenceTrace]
    diagnostics: list[dict]
    merge_log: list[str]
    warnings: list[str]
    window: int

    def diagnostics_json_dict(self) -> dict:
        return {
            "window": self.window,
            "classes": {k: list(v) for k, v in self.classes.items()},
            "rho0": {k: str(v) for k, v in self.rho0.items()},
            "pairs": self.diagnostics,
            "merge_log": self.merge_log,
            "warnings": self.warnings,
        }


def _tail_mean(values):
    return sum(values) / len(values)


def _spread(values):
    return max(values) - min(values)


def recover_cluster(
    cloud: LeveledPointCloud,
    tol_rel: float = DEFAULT_TOL_REL,
    tol_abs: float = DEFAULT_TOL_ABS,
    window: Optional[int] = None,
    use_exact: bool = False,
) -> RecoveredCluster:
    """Quotient the cloud's labeled sequences into a weighted rooted graph.

    ``use_exact`` switches all measurements to the rational shadows (when the
    cloud carries them), making edge weights and adjacency decisions exact.
    """
    if not cloud.levels:
        raise GraphError("empty cloud")
    labels = cloud.labels()
    if any(lbl is None for lbl in labels):
        raise GraphError(
            "cloud has unlabeled points; recovery needs sequences "
            "(label_unlabeled_cloud offers a best-effort matching)"
        )

    depth = cloud.depth
    if window is None:
        window = cloud.period if cloud.period else max(4, depth // 3)
    if window < 1:
        raise GraphError("window must be positive")
    if window > depth:
        raise GraphError(f"window {window} exceeds cloud depth {depth}")
    if cloud.period and window < cloud.period:
        raise GraphError(
            f"window {window} is shorter than the metric-family period {cloud.period}: "
            "oscillation between family members would be undetectable"
        )

    tail = cloud.levels[-window:]
    per_level = []
    for lvl in tail:
        pts = cloud.points_by_label(lvl)
        if set(pts) != set(labels):
            missing = sorted(set(labels) - set(pts))
            raise GraphError(f"level {lvl.n} is missing labels {missing}")
        per_level.append((lvl, pts))

    if use_exact:
        if not cloud.has_exact():
            raise GraphError("cloud carries no exact shadows; cannot recover exactly")

        def coords(p: CloudPoint):
            return p.exact

        def scale(lvl: CloudLevel):
            return lvl.r_exact

        zero = Fraction(0)
        t_rel = Fraction(tol_rel)
        t_abs = Fraction(tol_abs)
    else:

        def coords(p: CloudPoint):
            return p.coords

        def scale(lvl: CloudLevel):
            return lvl.r

        zero = 0.0
        t_rel = tol_rel
        t_abs = tol_abs

    def base_distance(p: CloudPoint):
        return max(abs(c) for c in coords(p))

    b: dict = {_BASE: [zero] * window}
    for lbl in labels:
        b[lbl] = [
            base_distance(pts[lbl]) / scale(lvl) for (lvl, pts) in per_level
        ]

    def pair_values(x, y):
        if x is _BASE:
            return b[y]
        if y is _BASE:
            return b[x]
        return [
            sup_distance(coords(pts[x]), coords(pts[y])) / scale(lvl)
            for (lvl, pts) in per_level
        ]

    all_traces = [_BASE] + list(labels)
    base_scale = max((max(b[lbl]) for lbl in labels), default=zero)
    eq_thresh = t_abs + t_rel * base_scale

    merge_log: list[str] = []
    warnings: list[str] = []

    # --- which sequences vanish at the basepoint ---------------------------
    traces = {lbl: SequenceTrace(lbl, b[lbl], {}) for lbl in labels}
    decayed: set = set()
    for lbl in labels:
        vals = b[lbl]
        if all(v <= eq_thresh for v in vals):
            continue  # equivalence handles it below
        nonincreasing = all(vals[i + 1] <= vals[i] + eq_thresh for i in range(len(vals) - 1))
        if nonincreasing and vals[-1] <= vals[0] / 2:
            decayed.add(lbl)
            traces[lbl].merged_into_root = True
            traces[lbl].merge_reason = "decay"
            merge_log.append(
                f"{lbl!r} absorbed into the root class: normalized basepoint "
                f"distance decays {float(vals[0]):.3g} -> {float(vals[-1]):.3g}"
            )

    # --- equivalence classes ------------------------------------------------
    parent = {t: t for t in all_traces}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    def union(s, t):
        rs, rt = find(s), find(t)
        if rs != rt:
            parent[rs] = rt

    pair_cache: dict = {}
    for i, x in enumerate(all_traces):
        for y in all_traces[i + 1 :]:
            vals = pair_values(x, y)
            pair_cache[(x, y)] = vals
            if x is not _BASE and y is not _BASE:
                traces[x].pair_values[y] = vals
                traces[y].pair_values[x] = vals
            if all(v <= eq_thresh for v in vals):
                union(x, y)
                if x is _BASE and not traces[y].merged_into_root:
                    traces[y].merged_into_root = True
                    traces[y].merge_reason = "threshold"
    for lbl in decayed:
        union(lbl, _BASE)

    classes_by_root: dict = {}
    for t in all_traces:
        classes_by_root.setdefault(find(t), []).append(t)

    # Transitive closure must not chain far-apart sequences together. Decayed
    # sequences are exempt: they join the root by trend, not by proximity.
    for members in classes_by_root.values():
        for i, x in enumerate(members):
            for y in members[i + 1 :]:
                if x in decayed or y in decayed:
                    continue
                vals = pair_cache.get((x, y)) or pair_cache.get((y, x)) or pair_values(x, y)
                if _tail_mean(vals) > 3 * eq_thresh:
                    raise GraphError(
                        "equivalence closure merged sequences that are not close: "
                        f"{x!r} and {y!r} have mean normalized distance "
                        f"{float(_tail_mean(vals)):.3g} > 3x tolerance; "
                        "tolerances are inconsistent with this cloud"
                    )

    # --- name classes, pick representatives ---------------------------------
    root_key = find(_BASE)
    class_info: list[tuple[str, object, list]] = []  # (name, representative, members)
    for key, members in classes_by_root.items():
        real = sorted(m for m in members if m is not _BASE)
        if key == root_key:
            name = real[0] if real else "nu0"
            rep = _BASE  # the origin is the cleanest root representative
        else:
            name = real[0]
            rep = real[0]
        class_info.append((name, rep, real))
    class_info.sort(key=lambda item: item[0])
    if len({name for name, _, _ in class_info}) != len(class_info):
        raise GraphError("class naming collision; labels are not distinct")

    # --- drop sequences with no stable normalized basepoint distance --------
    kept: list[tuple[str, object, list]] = []
    for name, rep, members in class_info:
        if rep is _BASE:
            kept.append((name, rep, members))
            continue
        vals = b[rep]
        thr = t_abs + t_rel * _tail_mean(vals)
        if _spread(vals) > thr:
            warnings.append(
                f"dropped {name!r}: normalized basepoint distance does not "
                f"stabilize (spread {float(_spread(vals)):.3g})"
            )
            continue
        kept.append((name, rep, members))

    # --- adjacency between classes ------------------------------------------
    root_name = next(name for name, rep, _ in kept if rep is _BASE)
    diagnostics: list[dict] = []
    edges = {}
    for i, (name_a, rep_a, _) in enumerate(kept):
        for name_b, rep_b, _ in kept[i + 1 :]:
            x, y = (rep_a, rep_b) if rep_a is not _BASE else (rep_b, rep_a)
            vals = pair_cache.get((x, y)) or pair_cache.get((y, x)) or pair_values(x, y)
            mean = _tail_mean(vals)
            spread = _spread(vals)
            thr = t_abs + t_rel * mean
            adjacent = spread <= thr
            diagnostics.append(
                {
                    "pair": f"{name_a}|{name_b}",
                    "spread": float(spread),
                    "liminf_estimate": float(min(vals)),
                    "limsup_estimate": float(max(vals)),
                    "mean": float(mean),
                    "adjacent": adjacent,
                }
            )
            if adjacent:
                weight = mean if isinstance(mean, Fraction) else Fraction(mean)
                edges[(name_a, name_b)] = weight

    rho0: dict[str, Fraction] = {}
    for name, rep, _ in kept:
        if rep is _BASE:
            rho0[name] = Fraction(0)
        else:
            mean = _tail_mean(b[rep])
            rho0[name] = mean if isinstance(mean, Fraction) else Fraction(mean)

    graph = WeightedRootedGraph([name for name, _, _ in kept], edges, root_name)
    classes = {
        name: tuple(members) if members else (name,) for name, _, members in kept
    }
    return RecoveredCluster(
        graph=graph,
        rho0=rho0,
        classes=classes,
        traces=traces,
        diagnostics=diagnostics,
        merge_log=merge_log,
        warnings=warnings,
        window=window,
    )


# ---------------------------------------------------------------------------
# invariants of recovered clusters
# ---------------------------------------------------------------------------


def validate_recovered_cluster(
    rc: RecoveredCluster,
    tol_rel: float = DEFAULT_TOL_REL,
    tol_abs: float = DEFAULT_TOL_ABS,
) -> list[str]:
    """Check the structural invariants every true cluster satisfies.

    Returns a list of violation descriptions (empty means all hold): the root
    dominates, the graph is metrizable (up to float tolerance when weights
    came from binary64 data), the maximal-clique bound holds, and the
    root-distance values are pairwise distinct beyond tolerance.
    """
    problems: list[str] = []
    g = rc.graph
    if not is_dominating(g, g.root):
        problems.append(f"root {g.root!r} is not dominating")

    verdict = check_metrizable(g)
    if verdict.classification is Metrizability.NOT_PSEUDOMETRIZABLE:
        c = verdict.witness_cycle
        violation = float(2 * c.max_weight() - c.total_weight())
        scale = float(c.total_weight())
        if violation > tol_abs + tol_rel * scale:
            problems.append(
                f"not metrizable: cycle {c.vertices} violates by {violation:.3g}"
            )
    elif verdict.classification is Metrizability.PSEUDOMETRIZABLE_ONLY:
        problems.append(f"zero-weight edge {verdict.zero_weight_edge}")

    try:
        report = clique_bound_check(g)
        if not report.holds:
            problems.append(
                f"maximal clique count {report.clique_count} exceeds bound {report.bound}"
            )
    except GraphError as exc:
        problems.append(f"clique bound not checkable: {exc}")

    names = sorted(rc.rho0)
    for i, u in enumerate(names):
        for v in names[i + 1 :]:
            a, bb = float(rc.rho0[u]), float(rc.rho0[v])
            if abs(a - bb) <= tol_abs + tol_rel * max(abs(a), abs(bb)):
                problems.append(
                    f"root-distance values of {u!r} and {v!r} are not distinct beyond tolerance"
                )
    return problems


# ---------------------------------------------------------------------------
# subsampling
# ---------------------------------------------------------------------------


def subsample_levels(cloud: LeveledPointCloud, indices: Sequence[int]) -> LeveledPointCloud:
    """Restrict the cloud to the given level numbers (strictly increasing).

    The recovered cluster of any subsample receives a weight preserving
    homomorphism from the full recovery; it is injective whenever the full
    root-distance values are pairwise distinct. Family-period metadata does
    not survive subsampling and is cleared.
    """
    if not indices:
        raise GraphError("empty level selection")
    idx = list(indices)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise GraphError("level selection must be strictly increasing")
    available = {lvl.n: lvl for lvl in cloud.levels}
    missing = [n for n in idx if n not in available]
    if missing:
        raise GraphError(f"levels {missing} are not present in the cloud")
    return LeveledPointCloud(
        dimension=cloud.dimension,
        levels=[available[n] for n in idx],
        period=None,
        norm=cloud.norm,
    )


def alternating_period_indices(cloud: LeveledPointCloud) -> list[int]:
    """Level numbers of every other whole family period (first period kept).

    Keeping whole periods preserves the multiset of family members each pair
    is measured against, so recovery over the subsample reproduces the full
    recovery; this is the residue-safe counterpart of "take every other
    level", which for some family sizes silently drops half the members.
    """
    p = cloud.period or 1
    return [lvl.n for i, lvl in enumerate(cloud.levels) if (i // p) % 2 == 0]


def period_stride_indices(cloud: LeveledPointCloud, offset: int = 0) -> list[int]:
    """Level numbers of a single residue class modulo the family period.

    Recovery over such a subsample sees one fixed family member, so every
    stabilized pair becomes an edge: the recovered graph gains the
    adjacencies the full cluster deliberately lacks.
    """
    if not cloud.period:
        raise GraphError("cloud carries no family-period metadata")
    p = cloud.period
    if not 0 <= offset < p:
        raise GraphError(f"offset must lie in [0, {p})")
    return [lvl.n for i, lvl in enumerate(cloud.levels) if i % p == offset]


# ---------------------------------------------------------------------------
# finite-scale diagnostics
# ---------------------------------------------------------------------------


def spread_functional(points: Sequence[Sequence[float]], basepoint: Sequence[float]) -> float:
    """Normalized spread of an n-tuple of points against a basepoint.

    min_k d(x_k, p) * prod_{k<l} d(x_k, x_l) / (max_k d(x_k, p))^(n(n-1)/2+1).
    Zero when all points coincide with the basepoint (by convention) or any
    two points coincide. Values near zero for all large tuples indicate the
    space cannot sustain more than n-1 separated directions at infinity.
    """
    pts = [tuple(float(c) for c in p) for p in points]
    n = len(pts)
    if n < 2:
        raise GraphError("the spread functional needs at least 2 points")
    base = tuple(float(c) for c in basepoint)
    base_dists = [sup_distance(p, base) for p in pts]
    top = max(base_dists)
    if top == 0:
        return 0.0
    product = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            product *= sup_distance(pts[i], pts[j])
    return min(base_dists) * product / top ** (n * (n - 1) // 2 + 1)


def annulus_diameter_table(
    cloud: LeveledPointCloud, k: float, radii: Sequence[float]
) -> list[dict]:
    """diam(A(p, r, k))/r for each radius r, over all points of the cloud.

    A(p, r, k) is the annulus of points whose basepoint distance lies in
    [r/k, r*k]; an empty or one-point annulus contributes 0. The values
    staying small as r grows (for k near 1) is the finite-scale shadow of the
    sphere-collapse condition; no limit is decided here.
    """
    if k < 1:
        raise GraphError("annulus parameter k must be >= 1")
    pts = [p.coords for lvl in cloud.levels for p in lvl.points]
    origin = (0.0,) * cloud.dimension
    norms = [sup_distance(p, origin) for p in pts]
    table = []
    for r in radii:
        if r <= 0:
            raise GraphError("radii must be positive")
        members = [p for p, nrm in zip(pts, norms) if r / k <= nrm <= r * k]
        if len(members) < 2:
            diam = 0.0
        else:
            diam = max(
                sup_distance(a, bb)
                for i, a in enumerate(members)
                for bb in members[i + 1 :]
            )
        table.append({"r": float(r), "value": diam / r, "points": len(members)})
    return table


# ---------------------------------------------------------------------------
# best-effort labeling of raw clouds (heuristic)
# ---------------------------------------------------------------------------


def label_unlabeled_cloud(cloud: LeveledPointCloud) -> LeveledPointCloud:
    """Heuristic: thread unlabeled points into sequences by basepoint distance.

    Greedy nearest-normalized-distance matching across consecutive levels.
    Best effort only: recovery proper requires honest sequences, and this
    matching can be wrong whenever distinct sequences cross scales. Levels
    must all contain the same number of points.
    """
    if not cloud.levels:
        raise GraphError("empty cloud")
    counts = {len(lvl.points) for lvl in cloud.levels}
    if len(counts) != 1:
        raise GraphError("levels have differing point counts; cannot thread sequences")
    origin = (0.0,) * cloud.dimension

    def norm_of(p: CloudPoint, lvl: CloudLevel) -> float:
        return sup_distance(p.coords, origin) / lvl.r

    new_levels: list[CloudLevel] = []
    prev_values: list[tuple[str, float]] = []
    for lvl in cloud.levels:
        ranked = sorted(lvl.points, key=lambda p: norm_of(p, lvl))
        if not prev_values:
            assigned = {f"s{i + 1}": p for i, p in enumerate(ranked)}
        else:
            assigned = {}
            free = dict(prev_values)
            for p in ranked:
                val = norm_of(p, lvl)
                best = min(free, key=lambda lbl: abs(free[lbl] - val))
                assigned[best] = p
                del free[best]
        new_points = [
            CloudPoint(label=lbl, coords=p.coords, exact=p.exact)
            for lbl, p in sorted(assigned.items())
        ]
        prev_values = [
            (lbl, norm_of(p, lvl)) for lbl, p in sorted(assigned.items())
        ]
        new_levels.append(
            CloudLevel(n=lvl.n, r=lvl.r, r_exact=lvl.r_exact, points=new_points)
        )
    return LeveledPointCloud(
        dimension=cloud.dimension,
        levels=new_levels,
        period=cloud.period,
        norm=cloud.norm,
    )
